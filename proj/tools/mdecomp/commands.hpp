#pragma once

#include <string>

#include "config.hpp"

namespace mdecomp::cli {

enum class LabelMode { Train, Predict, Eval };
enum class LabelsSource { Annotated, Predicted };

std::string to_string(LabelsSource source);

// Each stage reads its inputs from files named in the config (or written by an
// earlier stage into the output directory) and writes its results there.
void cmd_group(const RunConfig& config);
void cmd_label(const RunConfig& config, LabelMode mode);
void cmd_similarity(const RunConfig& config, LabelsSource labels);
void cmd_evaluate(const RunConfig& config, LabelsSource labels);

}  // namespace mdecomp::cli
