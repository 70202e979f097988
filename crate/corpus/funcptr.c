/* Dispatch through a function pointer table. */
int acc;

void inc(void) { acc = acc + 1; }
void dbl(void) { acc = acc * 2; }

void (*ops[2])(void);
volatile int sel;

void main(void) {
  int i;
  ops[0] = &inc;
  ops[1] = &dbl;
  for (i = 0; i < 3; i++) {
    int s = sel;
    if (s >= 0 && s < 2) {
      if (acc < 1000) ops[s]();
    }
  }
}
