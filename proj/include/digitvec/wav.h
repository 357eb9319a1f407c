// digitvec/wav.h

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIGITVEC_WAV_H_
#define DIGITVEC_WAV_H_

#include <string>

#include "digitvec/features.h"

namespace digitvec {

// Only mono 16-bit PCM RIFF/WAVE is supported; anything else is an IoError.
AudioBuffer ReadWav(const std::string &path);
void WriteWav(const std::string &path, const AudioBuffer &audio);

}  // namespace digitvec

#endif  // DIGITVEC_WAV_H_
