int main() {
  int i;
  int n;
  double A[4];
  n = 4;
  #pragma omp parallel for device(hmpp)
  for (i = 0; i < n; i++) {
    A[i] = 1.0;
    i = 0;
  }
}
