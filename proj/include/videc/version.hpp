#ifndef VIDEC_VERSION_HPP
#define VIDEC_VERSION_HPP

namespace videc {

inline constexpr const char *kVersion = "0.1.0";

} // namespace videc

#endif // VIDEC_VERSION_HPP
