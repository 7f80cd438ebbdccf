//===-- model_io.hpp - Model file round-tripping ------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <string>

#include "verimodel/assess.hpp"

namespace verimodel {

// Lossless JSON model document: format_version 1, kind linear|expression,
// feature names, parameters (or the expression in prefix notation) and
// training metadata including the retained training rows.
std::string model_to_json_text(const Model& model);
Model model_from_json_text(const std::string& text);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace verimodel
