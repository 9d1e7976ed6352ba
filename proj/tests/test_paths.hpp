#pragma once

#include <string>

#ifndef CYFUNNEL_TEST_DATA_DIR
#define CYFUNNEL_TEST_DATA_DIR "tests/data"
#endif

inline std::string test_data_path(const std::string& name) {
  return std::string(CYFUNNEL_TEST_DATA_DIR) + "/" + name;
}
