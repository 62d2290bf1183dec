#include <stdio.h>

#define N 64

static double a[N][N], b[N][N], c[N][N];

int main(void) {
  for (int i = 0; i < N; i++) {
    for (int j = 0; j < N; j++) {
      a[i][j] = (double)(i + j);
      b[i][j] = (double)(i - j);
    }
  }
  for (int i = 0; i < N; i++) {
    for (int k = 0; k < N; k++) {
      double aik = a[i][k];
      for (int j = 0; j < N; j++) {
        c[i][j] += aik * b[k][j];
      }
    }
  }
  printf("%f\n", c[N / 2][N / 2]);
  return 0;
}
