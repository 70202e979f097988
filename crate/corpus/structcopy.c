/* Aggregate assignment keeps field values and pointers. */
struct pair { short lo; short hi; int *ref; };
int cell;
struct pair A, B;

void main(void) {
  int v;
  A.lo = 5;
  A.hi = -7;
  A.ref = &cell;
  B = A;
  v = *B.ref + B.lo + B.hi;
}
