struct TableHeader { int num_columns; };

int column_length[8];

int GetRowLength(struct TableHeader table_header, int index) {
  int row_length = 0;
  row_length = row_length + column_length[index];
  return row_length;
}
