#pragma once

#include "finsler/expr/ast.hpp"

namespace finsler::expr {

// Tree-level helpers used to derive new fields from scene expressions
// (gauge shifts, isotropic truncation). Only trivial folding of 0 and 1 is
// applied; no other simplification.

Node add(Node a, Node b);
Node sub(Node a, Node b);
Node mul(Node a, Node b);
Node div(Node a, Node b);

/// Exact symbolic partial derivative with respect to one variable.
Node differentiate(const Node& n, int var);
ScalarField differentiate(const ScalarField& f, int var);

/// Replaces a variable by a numeric literal.
Node substitute(const Node& n, int var, double value);
ScalarField substitute(const ScalarField& f, int var, double value);

}  // namespace finsler::expr
