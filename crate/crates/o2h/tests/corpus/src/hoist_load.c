int main() {
  int i;
  int j;
  int t;
  int n;
  double beta;
  double A[16][16];
  double C[16][16];
  double s;
  n = 16;
  for (i = 0; i < n; i++) {
    for (j = 0; j < n; j++) {
      A[i][j] = (i + j) * beta;
    }
  }
  s = 0.0;
  for (t = 0; t < 4; t++) {
    #pragma omp target device (hmpp)
    #pragma omp parallel for
    for (i = 0; i < n; i++) {
      for (j = 0; j < n; j++) {
        C[i][j] = A[i][j] * 2.0 + t;
      }
    }
    s += 1.0;
  }
  print(C);
  print(s);
}
