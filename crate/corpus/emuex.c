/* 8086 register file viewed both as bytes and as 16-bit words. */
static union {
  struct { uint8 al, ah, bl, bh; } b;
  struct { uint16 ax, bx; } w;
} regs;

volatile int X;

void main(void) {
  regs.w.ax = X;
p1: ;
  if (!regs.b.ah) {
p2: ;
    regs.b.bl = regs.b.al;
p3: ;
  } else {
p4: ;
    regs.b.bh = regs.b.al;
p5: ;
  }
p6: ;
  regs.b.al = X;
p7: ;
}
