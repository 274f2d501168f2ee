int main() {
  int i;
  int j;
  int k;
  int ni;
  int nj;
  int nk;
  int nl;
  double alpha;
  double beta;
  double A[12][14];
  double B[14][10];
  double C[10][16];
  double D[12][10];
  double E[12][16];
  ni = 12;
  nk = 14;
  nj = 10;
  nl = 16;
  for (i = 0; i < ni; i++) {
    for (k = 0; k < nk; k++) {
      A[i][k] = (i * k + 1) * 0.125;
    }
  }
  for (k = 0; k < nk; k++) {
    for (j = 0; j < nj; j++) {
      B[k][j] = k * 0.25 - j * 0.5;
    }
  }
  for (j = 0; j < nj; j++) {
    for (k = 0; k < nl; k++) {
      C[j][k] = j * 0.375 + k;
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nj; j++) {
      D[i][j] = 0.0;
      for (k = 0; k < nk; k++) {
        D[i][j] += alpha * A[i][k] * B[k][j];
      }
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nl; j++) {
      E[i][j] = 0.0;
      for (k = 0; k < nj; k++) {
        E[i][j] += D[i][k] * C[k][j] * beta;
      }
    }
  }
  print(E);
}
