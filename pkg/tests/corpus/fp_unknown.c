int EqualInt4(int value1, int value2) {
  if (value1 == value2) {
    return 1;
  }
  return 0;
}

int LessthanInt8(long value1, long value2) {
  if (value1 < value2) {
    return 1;
  }
  return 0;
}

int take_addresses() {
  int (*g1)(int, int);
  g1 = &EqualInt4;
  int (*g2)(int, int);
  g2 = &LessthanInt8;
  return 0;
}

int dispatch_unknown(int (*fp)(int, int), int x, int y) {
  int r = fp(x, y);
  return r;
}
