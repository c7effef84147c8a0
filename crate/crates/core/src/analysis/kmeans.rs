use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // supplies f64 math under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pose::{Frame, Pose3D};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no centroid moves more than this (mm, in pose space).
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iters: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseClusters {
    pub k: usize,
    pub seed: u64,
    /// Flattened `[x0, y0, z0, x1, ...]` root-relative centroids.
    pub centroids: Vec<Vec<f64>>,
    /// Cluster id per input pose.
    pub assignments: Vec<usize>,
    /// Total within-cluster squared distance (mm^2).
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    /// Class name per cluster, once attached by [`assign_classes`].
    pub class_map: Option<Vec<String>>,
}

impl PoseClusters {
    pub fn class_of_cluster(&self, cluster: usize) -> Option<&str> {
        self.class_map.as_ref()?.get(cluster).map(String::as_str)
    }

    /// Class label of an input pose.
    pub fn frame_class(&self, index: usize) -> Option<&str> {
        self.class_of_cluster(*self.assignments.get(index)?)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm on flattened poses with D^2-weighted seeding.
pub fn kmeans_poses(poses: &[Pose3D], config: &KMeansConfig) -> Result<PoseClusters> {
    let k = config.k;
    if k == 0 || poses.len() < k {
        return Err(Error::TooFewPoses { k, got: poses.len() });
    }
    let skeleton = poses[0].skeleton();
    for p in poses {
        if p.skeleton() != skeleton || p.len() != poses[0].len() {
            return Err(Error::SkeletonMismatch);
        }
        if p.frame() != Frame::RootRelative {
            return Err(Error::WrongFrame);
        }
    }
    let data: Vec<Vec<f64>> = poses.iter().map(Pose3D::to_flat).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_centroids(&data, k, &mut rng);

    let n = data.len();
    let dim = data[0].len();
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let (changed, inertia) = assign(&data, &centroids, &mut assignments);
        history.push(inertia);
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mean: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&mean, &centroids[c]).sqrt());
            centroids[c] = mean;
        }
        for c in 0..k {
            if counts[c] != 0 {
                continue;
            }
            // Reseed from the pose farthest from its centroid, taken from a
            // cluster that can spare it.
            let far = (0..n)
                .filter(|&i| counts[assignments[i]] > 1)
                .max_by(|&i, &j| {
                    let di = sq_dist(&data[i], &centroids[assignments[i]]);
                    let dj = sq_dist(&data[j], &centroids[assignments[j]]);
                    di.total_cmp(&dj).then(j.cmp(&i))
                });
            if let Some(i) = far {
                counts[assignments[i]] -= 1;
                counts[c] = 1;
                assignments[i] = c;
                shift = shift.max(sq_dist(&data[i], &centroids[c]).sqrt());
                centroids[c] = data[i].clone();
            }
        }
        if shift < config.tol {
            let (_, inertia) = assign(&data, &centroids, &mut assignments);
            history.push(inertia);
            break;
        }
    }

    Ok(PoseClusters {
        k,
        seed: config.seed,
        centroids,
        inertia: *history.last().unwrap_or(&0.0),
        inertia_history: history,
        assignments,
        iterations,
        class_map: None,
    })
}

/// k-means++ seeding; falls back to the first unused pose once every
/// remaining pose coincides with a chosen centroid.
fn seed_centroids(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![data[first].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &data[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if r < d {
                        break;
                    }
                    r -= d;
                }
            }
            pick
        } else {
            None
        };
        let i = pick.unwrap_or_else(|| (0..n).find(|&i| !chosen[i]).unwrap_or(0));
        chosen[i] = true;
        for (d, x) in d2.iter_mut().zip(data) {
            *d = d.min(sq_dist(x, &data[i]));
        }
        d2[i] = 0.0;
        centroids.push(data[i].clone());
    }
    centroids
}

/// Nearest-centroid assignment (lowest index wins ties). Returns whether any
/// assignment changed and the resulting inertia.
fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &mut [usize]) -> (bool, f64) {
    let mut changed = false;
    let mut inertia = 0.0;
    for (x, a) in data.iter().zip(assignments.iter_mut()) {
        let (best, dist) = centroids
            .iter()
            .enumerate()
            .map(|(c, m)| (c, sq_dist(x, m)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        if *a != best {
            *a = best;
            changed = true;
        }
        inertia += dist;
    }
    (changed, inertia)
}

/// Attaches a class name to every cluster.
pub fn assign_classes(clusters: &PoseClusters, class_map: &BTreeMap<usize, String>) -> Result<PoseClusters> {
    if let Some(&c) = class_map.keys().find(|&&c| c >= clusters.k) {
        return Err(Error::IndexOutOfRange {
            index: c,
            len: clusters.k,
            context: "class map cluster id",
        });
    }
    let names = (0..clusters.k)
        .map(|c| class_map.get(&c).cloned().ok_or(Error::IncompleteMap(c)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = clusters.clone();
    out.class_map = Some(names);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{build_skeleton, JointDef, KinematicTree, SkeletonDef};
    use crate::Vector3;
    use alloc::borrow::ToOwned;

    fn pair() -> KinematicTree {
        build_skeleton(&SkeletonDef {
            name: "pair".to_owned(),
            joints: vec![
                JointDef { name: "a".to_owned(), parent: 0 },
                JointDef { name: "b".to_owned(), parent: 0 },
            ],
            root: 0,
            eval_subset: vec![0, 1],
            symmetry: vec![],
        })
        .unwrap()
    }

    fn poses(t: &KinematicTree, xs: &[f64]) -> Vec<Pose3D> {
        xs.iter()
            .map(|&x| Pose3D::root_relative(vec![Vector3::zeros(), Vector3::new(x, 0.5 * x, 0.0)], t).unwrap())
            .collect()
    }

    #[test]
    fn k_equals_n() {
        let t = pair();
        let p = poses(&t, &[1.0, 5.0, 9.0, 20.0]);
        let c = kmeans_poses(&p, &KMeansConfig::new(4, 3)).unwrap();
        assert_eq!(c.inertia, 0.0);
        let mut seen = c.assignments.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_one_is_mean() {
        let t = pair();
        let p = poses(&t, &[1.0, 5.0, 9.0, 21.0]);
        let c = kmeans_poses(&p, &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(c.centroids[0], vec![0.0, 0.0, 0.0, 9.0, 4.5, 0.0]);
    }

    #[test]
    fn duplicates_still_seed() {
        let t = pair();
        let p = poses(&t, &[2.0, 2.0, 2.0]);
        let c = kmeans_poses(&p, &KMeansConfig::new(3, 1)).unwrap();
        assert_eq!(c.inertia, 0.0);
        assert_eq!(c.centroids.len(), 3);
    }

    #[test]
    fn errors() {
        let t = pair();
        let p = poses(&t, &[1.0]);
        assert_eq!(
            kmeans_poses(&p, &KMeansConfig::new(2, 0)).unwrap_err(),
            Error::TooFewPoses { k: 2, got: 1 }
        );
        let g = Pose3D::global(vec![Vector3::zeros(); 2], &t).unwrap();
        assert_eq!(kmeans_poses(&[g], &KMeansConfig::new(1, 0)).unwrap_err(), Error::WrongFrame);
    }

    #[test]
    fn class_maps() {
        let t = pair();
        let p = poses(&t, &[1.0, 2.0, 100.0, 101.0]);
        let c = kmeans_poses(&p, &KMeansConfig::new(2, 7)).unwrap();
        let mut map = BTreeMap::new();
        map.insert(0, "Sit".to_owned());
        assert_eq!(assign_classes(&c, &map).unwrap_err(), Error::IncompleteMap(1));
        map.insert(1, "Sit".to_owned());
        let labeled = assign_classes(&c, &map).unwrap();
        assert!((0..4).all(|i| labeled.frame_class(i) == Some("Sit")));
        map.insert(2, "Crouch".to_owned());
        assert!(assign_classes(&c, &map).is_err());
    }
}
