// Copyright 2026 The VOCA-cpp Authors.
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

#ifndef VOCA_AUDIO_H_
#define VOCA_AUDIO_H_

#include <filesystem>
#include <vector>

namespace voca {

// Mono audio with amplitudes nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads RIFF/WAVE PCM16 or float32 with one or two channels. Stereo input is
// averaged to mono; PCM16 is scaled by 1/32768.
AudioClip LoadWav(const std::filesystem::path& path);
AudioClip ParseWav(const std::vector<char>& bytes);

// Writes a mono clip. PCM16 output rounds and saturates.
void SaveWav(const AudioClip& clip, const std::filesystem::path& path,
             WavEncoding encoding = WavEncoding::kPcm16);
std::vector<char> EncodeWav(const AudioClip& clip, WavEncoding encoding,
                            int channels = 1);

double Rms(const std::vector<double>& samples);

// Adds `noise` (looped or truncated to the signal length) scaled so that its
// RMS is rms(signal) * 10^(gain_db / 20), then clips to [-1, 1].
AudioClip MixNoise(const AudioClip& signal, const AudioClip& noise,
                   double gain_db);

}  // namespace voca

#endif  // VOCA_AUDIO_H_
