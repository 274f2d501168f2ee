int main() {
  int i;
  int n;
  double alpha;
  double A[8];
  double E[8];
  double G[8];
  n = 8;
  for (i = 0; i < n; i++) {
    A[i] = i * 0.5;
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    E[i] = A[i] + alpha;
  }
  #pragma omp target device (hmpp)
  #pragma omp parallel for
  for (i = 0; i < n; i++) {
    G[i] = E[i] * 2.0;
  }
  print(G);
}
