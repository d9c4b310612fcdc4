#pragma once

#include <string>

#include "diracgb/beams.hpp"
#include "diracgb/eulerian.hpp"
#include "diracgb/field.hpp"

namespace dgb {

/// Inverse of Grid::describe ("min:max:count[:p]" per axis, comma separated).
Grid parse_grid(const std::string& text);

/// Field snapshot:
///   # t=<t>
///   # epsilon=<eps>
///   # grid=<Grid::describe()>
///   x1,..,xd,re1,im1,re2,im2,re3,im3,re4,im4
/// followed by one row per node in grid order.
void write_field_csv(const std::string& path, const Field& f);
Field read_field_csv(const std::string& path);

/// Beam snapshot, one row per beam in set order:
///   t,branch,y1..yd,xi1..xid,S,P<ij>_re,P<ij>_im..,R<ij>_re,R<ij>_im..,
///   u<k>_re,u<k>_im (k = 1..4),weight,y0_1..y0_d
/// with matrices in row-major order; preceded by "# epsilon=" and "# dim=".
void write_beams_csv(const std::string& path, const BeamSet& bs);
BeamSet read_beams_csv(const std::string& path);

/// Level-set snapshot of one branch, one row per phase node:
///   y1..yd,xi1..xid,phi<k>_re,phi<k>_im (k = 1..d),S,u<k>_re,u<k>_im (k = 1..4)
/// preceded by "# t=", "# branch=" and "# grid=".
void write_phase_csv(const std::string& path, const PhaseSpaceFields& f);

/// Little-endian binary dump: "DGBF", u32 version, u32 axis count, per axis
/// (f64 min, f64 max, u64 count, u8 periodic), f64 t, f64 epsilon, then the
/// spinor values as (re, im) f64 pairs in grid order.
void write_field_binary(const std::string& path, const Field& f);
Field read_field_binary(const std::string& path);

}  // namespace dgb
