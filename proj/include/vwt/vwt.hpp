// Copyright 2026 The VWT Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VWT_VWT_HPP_
#define VWT_VWT_HPP_

#include "vwt/analysis.hpp"
#include "vwt/batcher.hpp"
#include "vwt/encoder.hpp"
#include "vwt/error.hpp"
#include "vwt/image.hpp"
#include "vwt/image_io.hpp"
#include "vwt/projection.hpp"
#include "vwt/render.hpp"
#include "vwt/tokenizer.hpp"
#include "vwt/version.hpp"
#include "vwt/vocab.hpp"

#endif  // VWT_VWT_HPP_
