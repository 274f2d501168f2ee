int main() {
  int i;
  int n;
  double alpha;
  double A[64];
  double C[64];
  n = 64;
  for (i = 0; i < n; i++) {
    A[i] = i * 1.5;
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    C[i] = A[i] * alpha;
  }
  print(C);
}
