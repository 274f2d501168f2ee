int main() {
  int x;
  x = 1;
  foo(x);
}
