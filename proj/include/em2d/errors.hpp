// Copyright (c) em2d contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef EM2D_ERRORS_HPP
#define EM2D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace em2d
{

// Input/config problems the user can fix by editing the config file.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string &msg) : std::runtime_error("config error: " + msg) {}
};

// Malformed or inconsistent mesh/contour data (files or generated).
class MeshFormatError : public std::runtime_error
{
public:
  explicit MeshFormatError(const std::string &msg) : std::runtime_error("mesh error: " + msg) {}
};

// Geometric coupling failures: contour nodes outside the mesh, contours in
// the PML shell, overlapping embedded domains, and the like.
class CouplingError : public std::runtime_error
{
public:
  explicit CouplingError(const std::string &msg) : std::runtime_error("coupling error: " + msg) {}
};

// Factorization breakdown, divergent series, overflow: anything where the
// numbers themselves went bad.
class NumericalFailure : public std::runtime_error
{
public:
  explicit NumericalFailure(const std::string &msg) : std::runtime_error("numerical failure: " + msg) {}
};

}  // namespace em2d

#endif
