#pragma once

// Published PER rows: (language, split, baseline, improved, printed relative
// reduction). Eval and dev splits are separate rows.

#include <array>

namespace ptforge::testing {

struct ReductionRow {
  const char* table;
  const char* language;
  const char* split;
  double baseline;
  double improved;
  double printed;
};

// FST vs RNN translation, then CL+PT-FST vs CL+RNN-PT adaptation.
inline constexpr std::array<ReductionRow, 22> kReductionRows{{
    {"translation", "ARB", "eval", 66.2, 60.9, 8.0},
    {"translation", "ARB", "dev", 65.8, 60.3, 8.3},
    {"translation", "YUE", "eval", 67.8, 62.4, 8.0},
    {"translation", "YUE", "dev", 66.4, 62.7, 5.6},
    {"translation", "NLD", "eval", 70.9, 67.9, 4.2},
    {"translation", "NLD", "dev", 68.9, 64.8, 6.0},
    {"translation", "HUN", "eval", 63.5, 60.2, 5.2},
    {"translation", "HUN", "dev", 63.7, 59.6, 6.4},
    {"translation", "CMN", "eval", 69.6, 67.2, 3.4},
    {"translation", "CMN", "dev", 70.9, 66.8, 5.8},
    {"translation", "SWH", "eval", 50.3, 46.8, 7.0},
    {"translation", "SWH", "dev", 47.6, 43.6, 8.4},
    {"translation", "URD", "eval", 70.5, 66.9, 5.1},
    {"translation", "URD", "dev", 67.2, 64.6, 3.9},
    {"adaptation", "YUE", "eval", 57.20, 55.62, 2.8},
    {"adaptation", "YUE", "dev", 56.57, 56.01, 1.0},
    {"adaptation", "HUN", "eval", 56.98, 53.73, 5.8},
    {"adaptation", "HUN", "dev", 57.26, 54.32, 5.1},
    {"adaptation", "CMN", "eval", 58.21, 55.64, 4.4},
    {"adaptation", "CMN", "dev", 57.85, 55.90, 3.4},
    {"adaptation", "SWH", "eval", 44.31, 41.21, 7.0},
    {"adaptation", "SWH", "dev", 48.88, 44.66, 4.2},
}};

}  // namespace ptforge::testing
