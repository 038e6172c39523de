#pragma once

#include <string>

#include "acmamba/training.hpp"

namespace acmamba {

// Checkpoint container ("ACMK"): 4-byte magic, little-endian u32 manifest
// length, JSON manifest (shapes, hyperparameters, parameter order), then the
// parameters as little-endian f32 in manifest order, column-major per tensor.
void saveCheckpoint(const Autoencoder& model, const std::string& path);
Autoencoder loadCheckpoint(const std::string& path);

} // namespace acmamba
