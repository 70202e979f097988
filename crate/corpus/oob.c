/* Reading past an embedded array is an error. */
struct { int a[3]; int b; } U;

void main(void) {
  int r;
  r = U.a[4];
}
