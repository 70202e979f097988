/* Generic byte copy of a record that hides a pointer at offset 16. */
void memcopy(void *dst, void *src, unsigned sz) {
  unsigned char *s = (unsigned char *)src;
  unsigned char *d = (unsigned char *)dst;
  unsigned i;
  for (i = 0; i < sz; i++) d[i] = s[i];
}

struct rec { int a[4]; int *p; };

int target;
struct rec R;

int get(void) {
  struct rec S;
  memcopy(&S, &R, sizeof(S));
copied: ;
  return *(S.p);
}

void main(void) {
  int r;
  target = 7;
  R.a[1] = 3;
  R.p = &target;
  r = get();
}
