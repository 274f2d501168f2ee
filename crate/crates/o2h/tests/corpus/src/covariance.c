int main() {
  int i;
  int j;
  int k;
  int n;
  int m;
  double fn;
  double data[14][10];
  double mean[10];
  double cov[10][10];
  n = 14;
  m = 10;
  for (i = 0; i < n; i++) {
    for (j = 0; j < m; j++) {
      data[i][j] = (i * j) * 0.17 + i;
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (j = 0; j < m; j++) {
    mean[j] = 0.0;
    for (i = 0; i < n; i++) {
      mean[j] += data[i][j];
    }
    mean[j] /= fn;
  }
  print(mean);
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    for (j = 0; j < m; j++) {
      data[i][j] -= mean[j];
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (j = 0; j < m; j++) {
    for (k = 0; k < m; k++) {
      cov[j][k] = 0.0;
      for (i = 0; i < n; i++) {
        cov[j][k] += data[i][j] * data[i][k];
      }
      cov[j][k] /= fn - 1.0;
    }
  }
  print(cov);
}
