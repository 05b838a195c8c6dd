#ifndef DERSENS_FORMAT_H_
#define DERSENS_FORMAT_H_

#include <string>

namespace dersens {

// Shortest round-trip decimal form, always with a fractional part or an
// exponent so that SQL readers treat it as a real ("10.0", "0.03125").
std::string FormatDouble(double v);

}  // namespace dersens

#endif  // DERSENS_FORMAT_H_
