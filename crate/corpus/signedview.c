/* Signed and unsigned views of the same bytes. */
union { int s; unsigned u; unsigned char b[4]; } w;
volatile int in;
unsigned top;
int low;

void main(void) {
  int x = in;
  if (x >= -3 && x <= 3) {
    w.s = x;
    top = w.u >> 24;
    low = w.b[0];
  }
}
