int main() {
  int *p;
}
