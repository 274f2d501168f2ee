int main() {
  int i;
  int n;
  double s;
  double x[32];
  double y[32];
  n = 32;
  for (i = 0; i < n; i++) {
    x[i] = i * 0.5;
    y[i] = 2.0 - i * 0.125;
  }
  s = 0.0;
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    s += x[i] * y[i];
  }
  print(s);
}
