int main() {
  int i;
  int j;
  int t;
  int n;
  double alpha;
  double A[16];
  double C[16];
  double D[16];
  n = 16;
  for (i = 0; i < n; i++) {
    A[i] = i * 0.25;
  }
  for (t = 0; t < 3; t++) {
    #pragma omp target device (hmpp)
    #pragma omp parallel for
    for (i = 0; i < n; i++) {
      C[i] = A[i] * alpha + t;
    }
  }
  for (i = 0; i < n; i++) {
    D[i] = 0.0;
    for (j = 0; j < n; j++) {
      D[i] += C[j] * 0.5;
    }
  }
  print(D);
}
