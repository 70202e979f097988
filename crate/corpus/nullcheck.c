/* A small list walked with a null test. */
struct node { int v; struct node *next; };
struct node n1, n2, n3;
int sum;

void main(void) {
  struct node *p;
  n1.v = 1; n1.next = &n2;
  n2.v = 2; n2.next = &n3;
  n3.v = 3;
  p = &n1;
  while (p != 0) {
    sum = sum + p->v;
    p = p->next;
  }
}
