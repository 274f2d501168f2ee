int main() {
  int i;
  int j;
  int m;
  int n;
  double fx;
  double A[18][12];
  double x[12];
  double tmp[18];
  double y[12];
  m = 18;
  n = 12;
  for (i = 0; i < n; i++) {
    x[i] = 1.0 + i / fx;
  }
  for (i = 0; i < m; i++) {
    for (j = 0; j < n; j++) {
      A[i][j] = (i + j) * 0.125;
    }
  }
  for (i = 0; i < n; i++) {
    y[i] = 0.0;
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < m; i++) {
    tmp[i] = 0.0;
    for (j = 0; j < n; j++) {
      tmp[i] += A[i][j] * x[j];
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (j = 0; j < n; j++) {
    for (i = 0; i < m; i++) {
      y[j] += A[i][j] * tmp[i];
    }
  }
  print(y);
}
