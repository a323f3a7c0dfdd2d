package io.usethesource.criterion;
// benchmark entry points for map subjects
class JmhMapBenchmarks {
  void timeLookup() {}
}
