// Copyright 2026 The qme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QME_ERRORS_HPP_
#define QME_ERRORS_HPP_

#include <stdexcept>

namespace qme {

// A covariance step left the physical region; the step size is too large.
class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The requested combination of options is outside what the model defines,
// e.g. the Ito work ledger with asymmetric channels.
class UnsupportedConfiguration : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace qme

#endif // QME_ERRORS_HPP_
