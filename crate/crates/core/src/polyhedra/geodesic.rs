use std::collections::HashMap;

const PHI: f64 = 1.618_033_988_749_895;

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

/// Unit icosahedron vertices and its 20 triangular faces.
pub fn icosahedron_mesh() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut raw = Vec::with_capacity(12);
    for s1 in [1.0, -1.0] {
        for s2 in [PHI, -PHI] {
            raw.push([0.0, s1, s2]);
            raw.push([s1, s2, 0.0]);
            raw.push([s2, 0.0, s1]);
        }
    }
    // edges have length 2 before normalization
    let mut faces = Vec::with_capacity(20);
    let is_edge = |a: usize, b: usize| (dist_sq(&raw[a], &raw[b]) - 4.0).abs() < 1e-9;
    for i in 0..12 {
        for j in i + 1..12 {
            if !is_edge(i, j) {
                continue;
            }
            for k in j + 1..12 {
                if is_edge(i, k) && is_edge(j, k) {
                    faces.push([i, j, k]);
                }
            }
        }
    }
    (raw.into_iter().map(normalize).collect(), faces)
}

/// Splits every edge into `k` parts, triangulates each face accordingly and
/// projects the new points onto the sphere. Points are shared between faces
/// through their barycentric key, so no float merging is needed.
fn subdivide(
    vertices: &[[f64; 3]],
    faces: &[[usize; 3]],
    k: usize,
) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut out: Vec<[f64; 3]> = vertices.to_vec();
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut new_faces = Vec::with_capacity(faces.len() * k * k);
    for &[a, b, c] in faces {
        let mut grid = vec![vec![0usize; k + 1]; k + 1];
        for i in 0..=k {
            for j in 0..=k - i {
                let l = k - i - j;
                let mut key: Vec<(usize, usize)> = [(a, i), (b, j), (c, l)]
                    .into_iter()
                    .filter(|&(_, w)| w > 0)
                    .collect();
                key.sort_unstable();
                let id = if key.len() == 1 {
                    key[0].0
                } else {
                    *index.entry(key).or_insert_with(|| {
                        let p: Vec<f64> = (0..3)
                            .map(|d| {
                                (i as f64 * vertices[a][d]
                                    + j as f64 * vertices[b][d]
                                    + l as f64 * vertices[c][d])
                                    / k as f64
                            })
                            .collect();
                        out.push(normalize([p[0], p[1], p[2]]));
                        out.len() - 1
                    })
                };
                grid[i][j] = id;
            }
        }
        for i in 0..k {
            for j in 0..k - i {
                new_faces.push([grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                if i + j + 2 <= k {
                    new_faces.push([grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                }
            }
        }
    }
    (out, new_faces)
}

/// Icosahedron refined by the given edge-subdivision schedule (`[3, 3]`
/// subdivides 3-fold, projects, and repeats).
pub fn geodesic_icosahedron(schedule: &[usize]) -> Vec<[f64; 3]> {
    let (mut vertices, mut faces) = icosahedron_mesh();
    for &k in schedule {
        if k > 1 {
            (vertices, faces) = subdivide(&vertices, &faces, k);
        }
    }
    dedupe(vertices)
}

/// Icosahedron vertices plus its normalized face centers (32 points).
pub fn pentakis_dodecahedron() -> Vec<[f64; 3]> {
    let (mut vertices, faces) = icosahedron_mesh();
    let centers: Vec<[f64; 3]> = faces
        .iter()
        .map(|f| {
            normalize([
                f.iter().map(|&i| vertices[i][0]).sum(),
                f.iter().map(|&i| vertices[i][1]).sum(),
                f.iter().map(|&i| vertices[i][2]).sum(),
            ])
        })
        .collect();
    vertices.extend(centers);
    vertices
}

pub fn octahedron() -> Vec<[f64; 3]> {
    vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
}

/// Drops points within `1e-9` of an earlier one.
pub fn dedupe(points: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let mut kept: Vec<[f64; 3]> = Vec::with_capacity(points.len());
    for p in points {
        if !kept.iter().any(|q| dist_sq(&p, q) < 1e-18) {
            kept.push(p);
        }
    }
    kept
}
