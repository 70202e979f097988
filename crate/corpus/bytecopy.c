/* Byte-wise copy between two integers. */
volatile int in;
int a, b;

void memcopy(void *dst, void *src, unsigned sz) {
  unsigned char *s = (unsigned char *)src;
  unsigned char *d = (unsigned char *)dst;
  unsigned i;
  for (i = 0; i < sz; i++) d[i] = s[i];
}

void main(void) {
  b = in;
  if (b >= -5 && b <= 100) {
    memcopy(&a, &b, 4);
copied: ;
  }
}
