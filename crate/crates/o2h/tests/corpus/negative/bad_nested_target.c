int main() {
  int i;
  int j;
  int n;
  double A[4];
  n = 4;
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    #pragma omp target device (hmpp)
    #pragma omp parallel for
    for (j = 0; j < n; j++) {
      A[j] = 1.0;
    }
  }
}
