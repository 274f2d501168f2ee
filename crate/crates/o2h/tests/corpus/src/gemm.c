int main() {
  int i;
  int j;
  int k;
  int ni;
  int nj;
  int nk;
  double alpha;
  double beta;
  double A[20][24];
  double B[24][18];
  double C[20][18];
  ni = 20;
  nj = 18;
  nk = 24;
  for (i = 0; i < ni; i++) {
    for (k = 0; k < nk; k++) {
      A[i][k] = i * 0.3 + k;
    }
  }
  for (k = 0; k < nk; k++) {
    for (j = 0; j < nj; j++) {
      B[k][j] = k * 0.2 - j;
    }
  }
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nj; j++) {
      C[i][j] = i + j * 0.1;
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nj; j++) {
      C[i][j] *= beta;
      for (k = 0; k < nk; k++) {
        C[i][j] += alpha * A[i][k] * B[k][j];
      }
    }
  }
  print(C);
}
