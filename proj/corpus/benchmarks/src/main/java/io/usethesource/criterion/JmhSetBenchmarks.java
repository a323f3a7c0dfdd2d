package io.usethesource.criterion;
// benchmark entry points for set subjects
class JmhSetBenchmarks {
  void timeInsert() {}
}
