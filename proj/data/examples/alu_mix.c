#include <stdint.h>
#include <stdio.h>

int main(void) {
  uint64_t x0 = 1, x1 = 2, x2 = 3, x3 = 5;
  for (uint32_t i = 0; i < 1000000; i++) {
    x0 = x0 * 6364136223846793005ULL + 1442695040888963407ULL;
    x1 ^= x1 << 13;
    x1 ^= x1 >> 7;
    x2 += x3 + i;
    x3 = (x3 | i) - (x2 & 0xff);
  }
  printf("%llu\n", (unsigned long long)(x0 ^ x1 ^ x2 ^ x3));
  return 0;
}
