/* Escaping an embedded array into the following field. */
struct { int a[3]; int b; } U;

void main(void) {
  int r;
  *(U.a + 3) = 42;
  r = U.b;
read: ;
}
