int main() {
  int i;
  i = 0;
  while (i < 4) {
    i = i + 1;
  }
}
