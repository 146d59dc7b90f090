#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sct/lang.hpp"

inline std::string read_corpus(const std::string& name) {
  std::string path = std::string(SCT_CORPUS_DIR) + "/" + name;
  std::ifstream in(path);
  if (!in) throw sct::Error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline sct::Program load_corpus(const std::string& name) {
  return sct::parse_program(read_corpus(name));
}
