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

int dispatch(int x, int y) {
  int (*other)(int, int);
  other = &LessthanInt8;
  int (*fp)(int, int);
  fp = &EqualInt4;
  int r = fp(x, y);
  return r;
}
