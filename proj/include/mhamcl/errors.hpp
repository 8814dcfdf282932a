// Copyright 2026 The mhamcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MHAMCL__ERRORS_HPP_
#define MHAMCL__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mhamcl
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Lookup outside the stored interval of a transform buffer.
class OutOfRangeError : public Error
{
public:
  using Error::Error;
};

// Malformed map image, metadata, run log or config document.
class FormatError : public Error
{
public:
  using Error::Error;
};

class ParameterError : public Error
{
public:
  using Error::Error;
};

// Weighted statistics over a population whose weights are all zero.
class DegenerateInputError : public Error
{
public:
  using Error::Error;
};

class InvalidStateError : public Error
{
public:
  using Error::Error;
};

class NumericError : public Error
{
public:
  using Error::Error;
};

}  // namespace mhamcl

#endif  // MHAMCL__ERRORS_HPP_
