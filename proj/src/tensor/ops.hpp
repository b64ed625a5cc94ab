#pragma once

#include "tensor/tape.hpp"

namespace attn {

// Differentiable operators. All reductions and inner products accumulate in
// double and round once to float on output.

/// input N x H x W x Cin, kernel kh x kw x Cin x Cout, bias Cout. Zero padding.
Var conv2d(Var input, Var kernel, Var bias, int stride = 1, int pad = 0);

/// Non-overlapping k x k max. Ties resolve to the first element in row-major
/// scan order of the window, and the gradient goes to that element.
Var maxpool2d(Var input, int k);

/// input m or N x m, weights m x n, bias n.
Var dense(Var input, Var weights, Var bias);

enum class Activation { Relu, Sigmoid };
Var activation(Var input, Activation kind);
inline Var relu(Var x) { return activation(x, Activation::Relu); }
inline Var sigmoid(Var x) { return activation(x, Activation::Sigmoid); }

/// Softmax over the last dimension.
Var softmax(Var logits);

/// a * b where b either matches a exactly or is a per-pixel map broadcast over
/// a's channel dimension (b shaped like a without its last dimension, or with
/// the last dimension equal to 1).
Var elemwise_mul(Var a, Var b);

/// Mean of all elements, as a scalar.
Var reduce_mean(Var t);

Var add(Var a, Var b);
Var scale(Var a, float factor);
Var reshape(Var a, Shape shape);
/// N x H x W x C -> N x C.
Var global_avg_pool(Var input);

/// Numerically stable logistic function.
float sigmoid_value(float x);

}  // namespace attn
