int main() {
  int i;
  int j;
  int k;
  int ni;
  int nj;
  int nk;
  int nl;
  int nm;
  double scale;
  double A[10][8];
  double B[8][12];
  double C[12][16];
  double D[16][14];
  double E[10][12];
  double F[12][14];
  double G[10][14];
  ni = 10;
  nk = 8;
  nj = 12;
  nm = 16;
  nl = 14;
  for (i = 0; i < ni; i++) {
    for (k = 0; k < nk; k++) {
      A[i][k] = (i * k + 1) * scale;
    }
  }
  for (k = 0; k < nk; k++) {
    for (j = 0; j < nj; j++) {
      B[k][j] = k * 0.5 - j * 0.25;
    }
  }
  for (j = 0; j < nj; j++) {
    for (k = 0; k < nm; k++) {
      C[j][k] = (j + k) * 0.75;
    }
  }
  for (k = 0; k < nm; k++) {
    for (j = 0; j < nl; j++) {
      D[k][j] = k * 0.125 + j * scale;
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nj; j++) {
      E[i][j] = 0.0;
      for (k = 0; k < nk; k++) {
        E[i][j] += A[i][k] * B[k][j];
      }
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (j = 0; j < nj; j++) {
    for (k = 0; k < nl; k++) {
      F[j][k] = 0.0;
      for (i = 0; i < nm; i++) {
        F[j][k] += C[j][i] * D[i][k];
      }
    }
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < ni; i++) {
    for (j = 0; j < nl; j++) {
      G[i][j] = 0.0;
      for (k = 0; k < nj; k++) {
        G[i][j] += E[i][k] * F[k][j];
      }
    }
  }
  print(G);
}
