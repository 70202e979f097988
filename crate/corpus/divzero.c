/* Division by an unchecked input. */
volatile int d;
int q;

void main(void) {
  int x = d;
  if (x >= 0 && x <= 10)
    q = 100 / x;
}
