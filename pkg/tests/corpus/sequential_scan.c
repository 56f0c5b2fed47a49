struct ColumnDefinition { int column_type; };
struct TableHeader {
  int num_columns;
  struct ColumnDefinition column_definitions[4];
};
struct Predicate { int column_id; };

int row_values[4];
int row_data[16];

int SequentialScan(int scan_direction, int num_predicates,
                   struct Predicate** predicates,
                   struct TableHeader* schema) {
  int column_offset;
  int column_value;
  int column_type;
  int i;
  struct Predicate* current_predicate;
  column_offset = 0;
  for (i = 0; i < schema->num_columns; i = i + 1) {
    struct TableHeader schema_inst = *schema;
    struct ColumnDefinition* col_def;
    col_def = schema_inst.column_definitions;
    struct ColumnDefinition col_def_i;
    col_def_i = col_def[i];
    column_type = col_def_i.column_type;
    if (column_type == 4) {
      int* row_value_i;
      row_value_i = row_values + i;
      *row_value_i = row_data[column_offset];
      column_offset = column_offset + 4;
    } else {
      if (column_type == 8) {
        int* row_value_j;
        row_value_j = row_values + i;
        *row_value_j = row_data[column_offset];
        column_offset = column_offset + 8;
      }
    }
  }
  column_value = 0;
  current_predicate = NULL;
  for (i = 0; i < num_predicates; i = i + 1) {
    struct Predicate* predicates_arr;
    predicates_arr = *predicates;
    struct Predicate predicate_i;
    predicate_i = predicates_arr[i];
    current_predicate = &((*predicates)[i]);
    struct Predicate curr_pred_inst;
    curr_pred_inst = *current_predicate;
    int col_id;
    col_id = curr_pred_inst.column_id;
    column_value = row_values[col_id];
  }
  return 0;
}
