int main() {
  int a[2][2][2][2];
  a[0][0][0][0] = 1;
}
