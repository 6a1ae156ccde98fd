//! Published reference values. Row order: CG k=1, HDG k=1, CG k=2, EDG k=2,
//! HDG k=2, CG k=3, EDG k=3, HDG k=3.

#![allow(dead_code)]

use tracemg::Method;

pub const ROWS: [(Method, usize); 8] = [
    (Method::Cg, 1),
    (Method::Hdg, 1),
    (Method::Cg, 2),
    (Method::Edg, 2),
    (Method::Hdg, 2),
    (Method::Cg, 3),
    (Method::Edg, 3),
    (Method::Hdg, 3),
];

/// `(rho, omega)` with one pre-sweep; columns VW, EW, JAC, LTVW, LTEW, GS.
pub const SINGLE_SWEEP: [[(f64, f64); 6]; 8] = [
    [
        (0.333, 0.89),
        (0.200, 0.90),
        (0.333, 0.89),
        (0.333, 0.89),
        (0.282, 0.90),
        (0.261, 1.02),
    ],
    [
        (0.403, 0.96),
        (0.466, 1.14),
        (0.801, 0.76),
        (0.609, 1.12),
        (0.604, 1.18),
        (0.394, 1.30),
    ],
    [
        (0.208, 1.00),
        (0.282, 0.84),
        (0.452, 1.00),
        (0.362, 1.02),
        (0.188, 1.02),
        (0.167, 1.06),
    ],
    [
        (0.233, 0.98),
        (0.194, 0.96),
        (0.537, 1.02),
        (0.423, 1.08),
        (0.325, 1.10),
        (0.246, 1.10),
    ],
    [
        (0.449, 0.98),
        (0.710, 1.30),
        (0.893, 0.82),
        (0.802, 1.18),
        (0.799, 1.20),
        (0.628, 1.50),
    ],
    [
        (0.233, 0.96),
        (0.203, 0.94),
        (0.654, 0.78),
        (0.368, 1.08),
        (0.301, 1.00),
        (0.233, 1.10),
    ],
    [
        (0.287, 0.94),
        (0.332, 1.10),
        (0.792, 0.90),
        (0.598, 1.20),
        (0.576, 1.18),
        (0.470, 1.30),
    ],
    [
        (0.476, 0.98),
        (0.794, 1.32),
        (0.932, 0.78),
        (0.862, 1.22),
        (0.862, 1.22),
        (0.745, 1.50),
    ],
];

/// TG(1,1), TG(1,2), TG(2,2) per row, one block per smoother: GS, VW, EW, LTEW.
pub const SWEEPS: [[[f64; 3]; 8]; 4] = [
    [
        [0.079, 0.069, 0.034],
        [0.238, 0.108, 0.058],
        [0.071, 0.042, 0.028],
        [0.083, 0.047, 0.025],
        [0.387, 0.241, 0.157],
        [0.095, 0.044, 0.023],
        [0.221, 0.115, 0.078],
        [0.555, 0.410, 0.306],
    ],
    [
        [0.112, 0.078, 0.061],
        [0.250, 0.149, 0.093],
        [0.064, 0.022, 0.012],
        [0.096, 0.042, 0.034],
        [0.225, 0.105, 0.071],
        [0.068, 0.023, 0.014],
        [0.122, 0.057, 0.042],
        [0.227, 0.114, 0.073],
    ],
    [
        [0.090, 0.048, 0.040],
        [0.342, 0.193, 0.138],
        [0.079, 0.022, 0.009],
        [0.094, 0.045, 0.032],
        [0.518, 0.360, 0.274],
        [0.104, 0.032, 0.017],
        [0.165, 0.063, 0.043],
        [0.631, 0.501, 0.398],
    ],
    [
        [0.098, 0.070, 0.052],
        [0.456, 0.284, 0.226],
        [0.065, 0.043, 0.030],
        [0.180, 0.076, 0.050],
        [0.672, 0.529, 0.456],
        [0.117, 0.057, 0.032],
        [0.327, 0.185, 0.119],
        [0.743, 0.640, 0.551],
    ],
];

/// Measured factors on the 64x64 mesh, two-grid then five-level V-cycle;
/// columns as in [`SINGLE_SWEEP`].
pub const MEASURED_64: [([f64; 6], [f64; 6]); 8] = [
    (
        [0.332, 0.197, 0.332, 0.332, 0.252, 0.242],
        [0.332, 0.196, 0.332, 0.332, 0.255, 0.177],
    ),
    (
        [0.396, 0.461, 0.799, 0.604, 0.698, 0.382],
        [0.452, 0.606, 0.800, 0.680, 0.694, 0.587],
    ),
    (
        [0.200, 0.276, 0.451, 0.357, 0.212, 0.159],
        [0.211, 0.276, 0.450, 0.357, 0.197, 0.162],
    ),
    (
        [0.231, 0.192, 0.531, 0.418, 0.316, 0.241],
        [0.227, 0.269, 0.530, 0.418, 0.319, 0.290],
    ),
    (
        [0.433, 0.707, 0.890, 0.800, 0.794, 0.616],
        [0.436, 0.707, 0.890, 0.800, 0.792, 0.626],
    ),
    (
        [0.229, 0.198, 0.646, 0.354, 0.296, 0.230],
        [0.225, 0.206, 0.653, 0.359, 0.314, 0.254],
    ),
    (
        [0.281, 0.324, 0.790, 0.585, 0.570, 0.446],
        [0.274, 0.324, 0.789, 0.608, 0.591, 0.466],
    ),
    (
        [0.472, 0.791, 0.931, 0.860, 0.860, 0.740],
        [0.472, 0.790, 0.931, 0.859, 0.859, 0.747],
    ),
];

pub const SIZES: [usize; 3] = [32, 64, 128];

/// Measured two-grid factors at [`SIZES`]: element patches for CG and EDG,
/// vertex patches for HDG.
pub const BY_SIZE: [(Method, usize, [f64; 3]); 9] = [
    (Method::Cg, 1, [0.194, 0.197, 0.196]),
    (Method::Edg, 1, [0.194, 0.197, 0.196]),
    (Method::Hdg, 1, [0.396, 0.396, 0.396]),
    (Method::Cg, 2, [0.276, 0.276, 0.277]),
    (Method::Edg, 2, [0.194, 0.192, 0.191]),
    (Method::Hdg, 2, [0.432, 0.433, 0.434]),
    (Method::Cg, 3, [0.198, 0.198, 0.199]),
    (Method::Edg, 3, [0.324, 0.324, 0.324]),
    (Method::Hdg, 3, [0.471, 0.472, 0.472]),
];
