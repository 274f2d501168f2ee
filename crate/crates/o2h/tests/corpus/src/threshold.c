int main() {
  int i;
  int n;
  double cut;
  double A[24];
  double C[24];
  n = 24;
  for (i = 0; i < n; i++) {
    A[i] = i * 0.125 - 0.44;
    C[i] = 0.0;
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    if (A[i] > cut) {
      C[i] = A[i];
    }
  }
  print(C);
}
