/* Message objects discriminated by a type tag stored in an overlay. */
struct msgA { int type; int a[2]; };
struct msgB { int type; double x; };

union msg {
  struct { int type; } T;
  struct msgA A;
  struct msgB B;
};

volatile unsigned sensor;
int out;

void process(union msg *m) {
  switch (m->T.type) {
  case 0: {
    struct msgA *msga = &(m->A);
    int data = (msga->a[0] & 0xFFFF) + 1;
    out = data;
  }
  case 1: {
    struct msgB *msgb = &(m->B);
    msgb->type = 1;
  }
  }
}

void read_sensor_4(unsigned *m) {
  *m = sensor;
}

void main(void) {
  unsigned char buf[sizeof(union msg)];
  int i;
  for (i = 0; i < sizeof(buf) / 4; i++)
    read_sensor_4((unsigned *)buf + i);
  process((union msg *)buf);
}
