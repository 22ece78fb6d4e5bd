// Entry tables for the explicit R-matrices. Each entry is (row, col, p) with
// p = [c0, c1, c2] meaning c0 + c1 u + c2 u^2. Rows are indexed by the
// first (auxiliary) factor, composite index i * dim(B) + k.

pub(crate) type Poly = [f64; 3];

pub(crate) const A: Poly = [2.0, 3.0, 1.0];
pub(crate) const B: Poly = [0.0, 2.0, 1.0];
pub(crate) const D: Poly = [0.0, -1.0, 0.0];
pub(crate) const E: Poly = [0.0, 1.0, 1.0];
pub(crate) const F: Poly = [2.0, 0.0, 0.0];
pub(crate) const G: Poly = [2.0, 1.0, 0.0];
pub(crate) const A1: Poly = [1.5, 1.0, 0.0];
pub(crate) const B1: Poly = [0.5, 1.0, 0.0];
pub(crate) const A3: Poly = [2.0, 1.0, 0.0];
pub(crate) const B3: Poly = [1.0, 1.0, 0.0];
pub(crate) const U: Poly = [0.0, 1.0, 0.0];
pub(crate) const U_PLUS_ONE: Poly = [1.0, 1.0, 0.0];
pub(crate) const ONE: Poly = [1.0, 0.0, 0.0];
pub(crate) const NEG_ONE: Poly = [-1.0, 0.0, 0.0];

/// Vector-vector R-matrix, 36 x 36.
pub(crate) const VV: [(u8, u8, Poly); 90] = [
    (0, 0, A),
    (1, 1, B),
    (1, 6, G),
    (2, 2, B),
    (2, 12, G),
    (3, 3, B),
    (3, 18, G),
    (4, 4, B),
    (4, 24, G),
    (5, 5, E),
    (5, 10, D),
    (5, 15, D),
    (5, 20, D),
    (5, 25, D),
    (5, 30, F),
    (6, 1, G),
    (6, 6, B),
    (7, 7, A),
    (8, 8, B),
    (8, 13, G),
    (9, 9, B),
    (9, 19, G),
    (10, 5, D),
    (10, 10, E),
    (10, 15, D),
    (10, 20, D),
    (10, 25, F),
    (10, 30, D),
    (11, 11, B),
    (11, 31, G),
    (12, 2, G),
    (12, 12, B),
    (13, 8, G),
    (13, 13, B),
    (14, 14, A),
    (15, 5, D),
    (15, 10, D),
    (15, 15, E),
    (15, 20, F),
    (15, 25, D),
    (15, 30, D),
    (16, 16, B),
    (16, 26, G),
    (17, 17, B),
    (17, 32, G),
    (18, 3, G),
    (18, 18, B),
    (19, 9, G),
    (19, 19, B),
    (20, 5, D),
    (20, 10, D),
    (20, 15, F),
    (20, 20, E),
    (20, 25, D),
    (20, 30, D),
    (21, 21, A),
    (22, 22, B),
    (22, 27, G),
    (23, 23, B),
    (23, 33, G),
    (24, 4, G),
    (24, 24, B),
    (25, 5, D),
    (25, 10, F),
    (25, 15, D),
    (25, 20, D),
    (25, 25, E),
    (25, 30, D),
    (26, 16, G),
    (26, 26, B),
    (27, 22, G),
    (27, 27, B),
    (28, 28, A),
    (29, 29, B),
    (29, 34, G),
    (30, 5, F),
    (30, 10, D),
    (30, 15, D),
    (30, 20, D),
    (30, 25, D),
    (30, 30, E),
    (31, 11, G),
    (31, 31, B),
    (32, 17, G),
    (32, 32, B),
    (33, 23, G),
    (33, 33, B),
    (34, 29, G),
    (34, 34, B),
    (35, 35, A),
];

/// Spinor(+)-vector R-matrix, 24 x 24, spinor factor first.
pub(crate) const SPV: [(u8, u8, Poly); 48] = [
    (0, 0, A1),
    (1, 1, A1),
    (2, 2, A1),
    (3, 3, B1),
    (3, 7, NEG_ONE),
    (3, 12, NEG_ONE),
    (4, 4, B1),
    (4, 8, ONE),
    (4, 18, NEG_ONE),
    (5, 5, B1),
    (5, 14, ONE),
    (5, 19, ONE),
    (6, 6, A1),
    (7, 3, NEG_ONE),
    (7, 7, B1),
    (7, 12, NEG_ONE),
    (8, 4, ONE),
    (8, 8, B1),
    (8, 18, ONE),
    (9, 9, A1),
    (10, 10, A1),
    (11, 11, B1),
    (11, 16, ONE),
    (11, 21, NEG_ONE),
    (12, 3, NEG_ONE),
    (12, 7, NEG_ONE),
    (12, 12, B1),
    (13, 13, A1),
    (14, 5, ONE),
    (14, 14, B1),
    (14, 19, NEG_ONE),
    (15, 15, A1),
    (16, 11, ONE),
    (16, 16, B1),
    (16, 21, ONE),
    (17, 17, A1),
    (18, 4, NEG_ONE),
    (18, 8, ONE),
    (18, 18, B1),
    (19, 5, ONE),
    (19, 14, NEG_ONE),
    (19, 19, B1),
    (20, 20, A1),
    (21, 11, NEG_ONE),
    (21, 16, ONE),
    (21, 21, B1),
    (22, 22, A1),
    (23, 23, A1),
];

/// Spinor(-)-vector R-matrix, 24 x 24, spinor factor first.
pub(crate) const SMV: [(u8, u8, Poly); 48] = [
    (0, 0, A1),
    (1, 1, A1),
    (2, 2, B1),
    (2, 7, NEG_ONE),
    (2, 12, NEG_ONE),
    (3, 3, A1),
    (4, 4, B1),
    (4, 9, ONE),
    (4, 18, NEG_ONE),
    (5, 5, B1),
    (5, 15, ONE),
    (5, 19, ONE),
    (6, 6, A1),
    (7, 2, NEG_ONE),
    (7, 7, B1),
    (7, 12, NEG_ONE),
    (8, 8, A1),
    (9, 4, ONE),
    (9, 9, B1),
    (9, 18, ONE),
    (10, 10, A1),
    (11, 11, B1),
    (11, 16, ONE),
    (11, 20, NEG_ONE),
    (12, 2, NEG_ONE),
    (12, 7, NEG_ONE),
    (12, 12, B1),
    (13, 13, A1),
    (14, 14, A1),
    (15, 5, ONE),
    (15, 15, B1),
    (15, 19, NEG_ONE),
    (16, 11, ONE),
    (16, 16, B1),
    (16, 20, ONE),
    (17, 17, A1),
    (18, 4, NEG_ONE),
    (18, 9, ONE),
    (18, 18, B1),
    (19, 5, ONE),
    // sign fixed by unitarity, YBE and the rank-4 degeneration
    (19, 15, NEG_ONE),
    (19, 19, B1),
    (20, 11, NEG_ONE),
    (20, 16, ONE),
    (20, 20, B1),
    (21, 21, A1),
    (22, 22, A1),
    (23, 23, A1),
];

/// Spinor(+)-spinor(-) R-matrix, 16 x 16.
pub(crate) const SPSM: [(u8, u8, Poly); 28] = [
    (0, 0, A3),
    (1, 1, A3),
    (2, 2, A3),
    (3, 3, B3),
    (3, 6, ONE),
    (3, 9, NEG_ONE),
    (3, 12, ONE),
    (4, 4, A3),
    (5, 5, A3),
    (6, 3, ONE),
    (6, 6, B3),
    (6, 9, ONE),
    (6, 12, NEG_ONE),
    (7, 7, A3),
    (8, 8, A3),
    (9, 3, NEG_ONE),
    (9, 6, ONE),
    (9, 9, B3),
    (9, 12, ONE),
    (10, 10, A3),
    (11, 11, A3),
    (12, 3, ONE),
    (12, 6, NEG_ONE),
    (12, 9, ONE),
    (12, 12, B3),
    (13, 13, A3),
    (14, 14, A3),
    (15, 15, A3),
];

/// Spinor-spinor R-matrix, 16 x 16.
pub(crate) const SS: [(u8, u8, Poly); 28] = [
    (0, 0, U_PLUS_ONE),
    (1, 1, U),
    (1, 4, ONE),
    (2, 2, U),
    (2, 8, ONE),
    (3, 3, U),
    (3, 12, ONE),
    (4, 1, ONE),
    (4, 4, U),
    (5, 5, U_PLUS_ONE),
    (6, 6, U),
    (6, 9, ONE),
    (7, 7, U),
    (7, 13, ONE),
    (8, 2, ONE),
    (8, 8, U),
    (9, 6, ONE),
    (9, 9, U),
    (10, 10, U_PLUS_ONE),
    (11, 11, U),
    (11, 14, ONE),
    (12, 3, ONE),
    (12, 12, U),
    (13, 7, ONE),
    (13, 13, U),
    (14, 11, ONE),
    (14, 14, U),
    (15, 15, U_PLUS_ONE),
];

pub(crate) const A2: f64 = 0.866_025_403_784_438_6;
pub(crate) const B2: f64 = 0.5;

/// Change of basis on the spinor pair, as listed (columns in s- x s+ order).
pub(crate) const S_CHANGE: [(u8, u8, f64); 28] = [
    (0, 0, 1.0),
    (1, 4, -1.0),
    (2, 1, -1.0),
    (3, 5, -1.0),
    (4, 3, B2),
    (4, 6, -B2),
    (4, 9, -B2),
    (4, 12, B2),
    (5, 8, 1.0),
    (6, 2, 1.0),
    (7, 3, B2),
    (7, 6, B2),
    (7, 9, B2),
    (7, 12, B2),
    (8, 10, 1.0),
    (9, 3, -B2),
    (9, 6, -B2),
    (9, 9, B2),
    (9, 12, B2),
    (10, 7, -1.0),
    (11, 11, -1.0),
    (12, 3, -A2),
    (12, 6, A2),
    (12, 9, -A2),
    (12, 12, A2),
    (13, 13, -1.0),
    (14, 14, -1.0),
    (15, 15, -1.0),
];
