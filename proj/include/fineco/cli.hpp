#pragma once

#include <string>
#include <vector>

namespace fineco {

// Parses and executes one command line (program name excluded). Commands:
//   gen-data  synthesize a planted-relevance dataset
//   train     fit a model and write checkpoint + loss log
//   eval      score a checkpoint on a dataset and write a metrics CSV
//   sweep     train/eval a strategy grid across seeds into an ablation CSV
//   report    render a sweep CSV as an aligned table and an SVG chart
//
// Every command writes a config echo file next to its outputs so a run can
// be reproduced from its artifacts alone. Returns the process exit code:
// 0 success, 1 usage error, 2 I/O or file-format error, 3 numeric failure.
int run_cli(std::vector<std::string> args);

}  // namespace fineco
