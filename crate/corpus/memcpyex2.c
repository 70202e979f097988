/* Copy by bunches of eight bytes, then byte by byte. */
void memcopy(void *dst, void *src, unsigned sz) {
  char *s = (char *)src;
  char *d = (char *)dst;
  for (; sz >= 8; sz -= 8, s += 8, d += 8)
    *((double *)d) = *((double *)s);
  for (; sz != 0; sz--, s++, d++) *d = *s;
}

struct rec { int a[4]; int *p; };

int target;
struct rec R;

void main(void) {
  struct rec S;
  int r;
  R.p = &target;
  memcopy(&S, &R, sizeof(S));
copied: ;
  r = *(S.p);
}
