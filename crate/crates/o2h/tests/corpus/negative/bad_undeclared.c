int main() {
  int a;
  a = b + 1;
}
