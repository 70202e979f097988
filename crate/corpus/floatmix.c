/* Floating-point arithmetic mixed with integer conversions. */
volatile int in;
double acc;
float f;
int k;

void main(void) {
  int i;
  int x = in;
  if (x >= 0 && x <= 1000) {
    for (i = 0; i < 5; i++)
      acc = acc + x * 0.5;
    f = acc;
    k = (int)f;
  }
}
