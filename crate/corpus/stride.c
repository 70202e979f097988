/* Pointer walk over an int array. */
int t[10];

void main(void) {
  int *p;
  for (p = t; p < t + 10; p++) {
body: ;
    *p = 1;
  }
}
