//! Five fixed orthographic views rendered with a z-buffer into binary PPM.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::mesh::{cross, dot, norm, sub, TriangleMesh, Vec3};

pub const WIDTH: usize = 800;
pub const HEIGHT: usize = 600;
const MARGIN: f64 = 0.05;
/// Darkest gray used for a lit surface; background stays at 0.
const MIN_SHADE: f64 = 40.0;

#[derive(Debug, Clone, Copy)]
pub struct View {
    pub name: &'static str,
    /// Direction the camera looks along.
    pub forward: Vec3,
    pub up: Vec3,
}

/// Front, profile, plan, three-quarter starboard bow, three-quarter port stern.
pub const VIEWS: [View; 5] = [
    View {
        name: "front",
        forward: [-1.0, 0.0, 0.0],
        up: [0.0, 0.0, 1.0],
    },
    View {
        name: "profile",
        forward: [0.0, -1.0, 0.0],
        up: [0.0, 0.0, 1.0],
    },
    View {
        name: "plan",
        forward: [0.0, 0.0, -1.0],
        up: [1.0, 0.0, 0.0],
    },
    View {
        name: "starboard_bow",
        forward: [-1.0, -1.0, -0.7],
        up: [0.0, 0.0, 1.0],
    },
    View {
        name: "port_stern",
        forward: [1.0, 1.0, -0.7],
        up: [0.0, 0.0, 1.0],
    },
];

fn unit(v: Vec3) -> Vec3 {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Gray-level image, row-major from the top-left corner.
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for &g in &self.pixels {
            out.extend_from_slice(&[g, g, g]);
        }
        out
    }
}

pub fn render_view(mesh: &TriangleMesh, view: &View) -> Image {
    let f = unit(view.forward);
    let r = unit(cross(f, view.up));
    let u = cross(r, f);
    let proj: Vec<Vec3> = mesh
        .vertices
        .iter()
        .map(|&p| [dot(p, r), dot(p, u), dot(p, f)])
        .collect();

    let mut pixels = vec![0u8; WIDTH * HEIGHT];
    if proj.is_empty() {
        return Image {
            width: WIDTH,
            height: HEIGHT,
            pixels,
        };
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &proj {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span_x = (hi[0] - lo[0]).max(f64::MIN_POSITIVE);
    let span_y = (hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = ((1.0 - 2.0 * MARGIN) * WIDTH as f64 / span_x)
        .min((1.0 - 2.0 * MARGIN) * HEIGHT as f64 / span_y);
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    let to_px = |p: &Vec3| {
        [
            0.5 * WIDTH as f64 + (p[0] - cx) * scale,
            0.5 * HEIGHT as f64 - (p[1] - cy) * scale,
            p[2],
        ]
    };

    let mut depth = vec![f64::INFINITY; WIDTH * HEIGHT];
    for t in &mesh.triangles {
        let w = t.map(|i| mesh.vertices[i as usize]);
        let n = cross(sub(w[1], w[0]), sub(w[2], w[0]));
        let nl = norm(n);
        if nl == 0.0 {
            continue;
        }
        let shade = (MIN_SHADE + (255.0 - MIN_SHADE) * (dot(n, f) / nl).abs()).round() as u8;
        let s = t.map(|i| to_px(&proj[i as usize]));
        let area =
            (s[1][0] - s[0][0]) * (s[2][1] - s[0][1]) - (s[1][1] - s[0][1]) * (s[2][0] - s[0][0]);
        if area.abs() < 1e-12 {
            continue;
        }
        let x0 = s
            .iter()
            .map(|p| p[0])
            .fold(f64::INFINITY, f64::min)
            .floor()
            .max(0.0) as usize;
        let x1 = (s
            .iter()
            .map(|p| p[0])
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil() as usize)
            .min(WIDTH - 1);
        let y0 = s
            .iter()
            .map(|p| p[1])
            .fold(f64::INFINITY, f64::min)
            .floor()
            .max(0.0) as usize;
        let y1 = (s
            .iter()
            .map(|p| p[1])
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil() as usize)
            .min(HEIGHT - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (qx, qy) = (px as f64 + 0.5, py as f64 + 0.5);
                let edge =
                    |a: &Vec3, b: &Vec3| (b[0] - a[0]) * (qy - a[1]) - (b[1] - a[1]) * (qx - a[0]);
                let w0 = edge(&s[1], &s[2]) / area;
                let w1 = edge(&s[2], &s[0]) / area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let d = w0 * s[0][2] + w1 * s[1][2] + w2 * s[2][2];
                let k = py * WIDTH + px;
                if d < depth[k] {
                    depth[k] = d;
                    pixels[k] = shade;
                }
            }
        }
    }
    Image {
        width: WIDTH,
        height: HEIGHT,
        pixels,
    }
}

/// Writes `<prefix>1.ppm` .. `<prefix>5.ppm` into `out_dir` and returns the paths.
pub fn render_views_with_prefix(
    mesh: &TriangleMesh,
    out_dir: &Path,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    if mesh.is_empty() {
        return Err(Error::InvalidInput("cannot render an empty mesh".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths = Vec::with_capacity(VIEWS.len());
    for (k, view) in VIEWS.iter().enumerate() {
        let path = out_dir.join(format!("{prefix}{}.ppm", k + 1));
        let img = render_view(mesh, view);
        std::fs::write(&path, img.to_ppm()).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes `view_1.ppm` .. `view_5.ppm`.
pub fn render_views(mesh: &TriangleMesh, out_dir: &Path) -> Result<Vec<PathBuf>> {
    render_views_with_prefix(mesh, out_dir, "view_")
}
