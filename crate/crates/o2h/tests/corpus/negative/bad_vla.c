int main() {
  int n;
  n = 4;
  int a[n];
  a[0] = 1;
}
