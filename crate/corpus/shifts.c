/* Packing and unpacking bytes with shifts and masks. */
volatile unsigned in;
unsigned char b0, b1, b2, b3;
unsigned packed;

void main(void) {
  unsigned x = in;
  b0 = x & 0xFF;
  b1 = (x >> 8) & 0xFF;
  b2 = (x >> 16) & 0xFF;
  b3 = x >> 24;
  packed = b0 | (b1 << 8) | (b2 << 16);
}
