// fam/net.cc
// Explicit instantiations of the templated engine for the two scalar types
// in use: float for training, double for gradient checks.

// Copyright 2026  The factored-am authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fam/net.hh"

namespace fam {

template struct Parameter<float>;
template struct Parameter<double>;
template struct Linear<float>;
template struct Linear<double>;
template class Mlp<float>;
template class Mlp<double>;
template struct Embedding<float>;
template struct Embedding<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace fam
