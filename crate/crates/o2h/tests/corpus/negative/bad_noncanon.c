int main() {
  int i;
  int n;
  n = 4;
  for (i = n; i > 0; i--) {
    n = n + 1;
  }
}
