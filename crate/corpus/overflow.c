/* Accumulator that may overflow an int. */
volatile int n;
int acc;

void main(void) {
  int i;
  int lim = n;
  for (i = 0; i < lim; i++)
    acc = acc + 100000;
}
