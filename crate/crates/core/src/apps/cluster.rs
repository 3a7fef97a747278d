use serde::{Deserialize, Serialize};

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// One agglomeration step. Leaves are numbered `0..n`; the cluster created
/// by merge `k` gets id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub id: usize,
    /// Number of leaves in the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Dendrogram = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if d.merges.len() + 1 != d.labels.len() {
            return Err(Error::Format(format!(
                "{} merges for {} leaves",
                d.merges.len(),
                d.labels.len()
            )));
        }
        Ok(d)
    }

    /// Newick text; branch lengths are height differences.
    pub fn to_newick(&self) -> String {
        let n = self.labels.len();
        if n == 1 {
            return format!("{};", quote(&self.labels[0]));
        }
        let height = |id: usize| if id < n { 0.0 } else { self.merges[id - n].height };
        fn node(d: &Dendrogram, id: usize, height: &dyn Fn(usize) -> f64, out: &mut String) {
            let n = d.labels.len();
            if id < n {
                out.push_str(&quote(&d.labels[id]));
                return;
            }
            let m = &d.merges[id - n];
            out.push('(');
            for (k, child) in [m.a, m.b].into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                node(d, child, height, out);
                out.push_str(&format!(":{}", m.height - height(child)));
            }
            out.push(')');
        }
        let mut out = String::new();
        node(self, n + self.merges.len() - 1, &height, &mut out);
        out.push_str(";\n");
        out
    }
}

fn quote(label: &str) -> String {
    if label.chars().any(|c| "()[]':;,".contains(c) || c.is_whitespace()) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Average-linkage (UPGMA) agglomerative clustering.
///
/// The closest pair of clusters is merged at each step; ties go to the pair
/// whose smallest leaf indices are lowest. Heights are made non-decreasing to
/// absorb rounding.
pub fn hierarchical_cluster(matrix: &DistanceMatrix) -> Dendrogram {
    let n = matrix.len();
    // Active clusters: (id, size, smallest leaf).
    let mut active: Vec<(usize, usize, usize)> = (0..n).map(|i| (i, 1, i)).collect();
    let mut d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| matrix.get(i, j)).collect()).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut last = 0.0f64;
    while active.len() > 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX, 0, 0);
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let (lx, ly) = (active[x].2, active[y].2);
                let key = (d[x][y], lx.min(ly), lx.max(ly));
                if key.0 < best.0 || (key.0 == best.0 && (key.1, key.2) < (best.1, best.2)) {
                    best = (key.0, key.1, key.2, x, y);
                }
            }
        }
        let (dist, _, _, x, y) = best;
        let (cx, cy) = (active[x], active[y]);
        let (first, second) = if cx.2 <= cy.2 { (cx, cy) } else { (cy, cx) };
        last = last.max(dist);
        let id = n + merges.len();
        let size = cx.1 + cy.1;
        merges.push(Merge {
            a: first.0,
            b: second.0,
            height: last,
            id,
            size,
        });
        // Lance–Williams update into slot x, then drop slot y.
        let (wx, wy) = (cx.1 as f64 / size as f64, cy.1 as f64 / size as f64);
        for z in 0..active.len() {
            if z != x && z != y {
                let v = wx * d[x][z] + wy * d[y][z];
                d[x][z] = v;
                d[z][x] = v;
            }
        }
        active[x] = (id, size, cx.2.min(cy.2));
        active.remove(y);
        d.remove(y);
        for row in &mut d {
            row.remove(y);
        }
    }
    Dendrogram {
        labels: matrix.labels().to_vec(),
        merges,
    }
}

/// Flat clustering into `k` groups by undoing the last `k - 1` merges.
/// Cluster numbers follow the first appearance of a leaf.
pub fn cut_dendrogram(dendrogram: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dendrogram.labels.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {k} out of range 1..={n}"
        )));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in &dendrogram.merges[..n - k] {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        parent[ra] = m.id;
        parent[rb] = m.id;
    }
    let mut names: Vec<Option<usize>> = vec![None; 2 * n - 1];
    let mut next = 0;
    Ok((0..n)
        .map(|leaf| {
            let r = find(&mut parent, leaf);
            *names[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect())
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (ka, kb) = (a.iter().max().map_or(0, |x| x + 1), b.iter().max().map_or(0, |x| x + 1));
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let rows: f64 = (0..ka).map(|x| choose2((0..kb).map(|y| table[x * kb + y]).sum())).sum();
    let cols: f64 = (0..kb).map(|y| choose2((0..ka).map(|x| table[x * kb + y]).sum())).sum();
    let total = choose2(a.len() as u64);
    let expected = if total > 0.0 { rows * cols / total } else { 0.0 };
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::Metric;

    fn matrix(labels: &[&str], values: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), values, Metric::LinearL2).unwrap()
    }

    #[test]
    fn two_leaves_merge_once() {
        let d = hierarchical_cluster(&matrix(&["a", "b"], vec![0.0, 3.0, 3.0, 0.0]));
        assert_eq!(d.merges.len(), 1);
        assert_eq!(d.merges[0].height, 3.0);
        assert_eq!(d.to_newick(), "(a:3,b:3);\n");
    }

    #[test]
    fn three_leaves_average_linkage() {
        let m = matrix(&["A", "B", "C"], vec![0.0, 1.0, 10.0, 1.0, 0.0, 10.0, 10.0, 10.0, 0.0]);
        let d = hierarchical_cluster(&m);
        assert_eq!((d.merges[0].a, d.merges[0].b, d.merges[0].height), (0, 1, 1.0));
        assert_eq!((d.merges[1].a, d.merges[1].b, d.merges[1].height), (3, 2, 10.0));
        assert_eq!(cut_dendrogram(&d, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(cut_dendrogram(&d, 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(cut_dendrogram(&d, 3).unwrap(), vec![0, 1, 2]);
        assert!(cut_dendrogram(&d, 4).is_err());
        assert_eq!(d.to_newick(), "((A:1,B:1):9,C:10);\n");
        assert_eq!(Dendrogram::from_json(&d.to_json().unwrap()).unwrap(), d);
    }

    #[test]
    fn ties_prefer_low_indices() {
        let m = matrix(
            &["a", "b", "c", "d"],
            vec![
                0.0, 2.0, 1.0, 1.0, //
                2.0, 0.0, 1.0, 1.0, //
                1.0, 1.0, 0.0, 2.0, //
                1.0, 1.0, 2.0, 0.0,
            ],
        );
        let d = hierarchical_cluster(&m);
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 2));
    }

    #[test]
    fn ari_matches_pair_counting() {
        // Brute force over all item pairs.
        fn rand_pairs(a: &[usize], b: &[usize]) -> f64 {
            let n = a.len();
            let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                for j in i + 1..n {
                    match (a[i] == a[j], b[i] == b[j]) {
                        (true, true) => ss += 1.0,
                        (true, false) => sd += 1.0,
                        (false, true) => ds += 1.0,
                        (false, false) => dd += 1.0,
                    }
                }
            }
            2.0 * (ss * dd - sd * ds) / ((ss + sd) * (sd + dd) + (ss + ds) * (ds + dd))
        }
        let a = [0, 0, 0, 1, 1, 1, 2, 2, 2];
        let b = [0, 0, 1, 1, 1, 2, 2, 2, 0];
        assert!((adjusted_rand_index(&a, &b).unwrap() - rand_pairs(&a, &b)).abs() < 1e-12);
        assert_eq!(adjusted_rand_index(&a, &[5, 5, 5, 3, 3, 3, 0, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn newick_quotes_awkward_labels() {
        let d = hierarchical_cluster(&matrix(&["walk 1", "it's"], vec![0.0, 1.0, 1.0, 0.0]));
        assert_eq!(d.to_newick(), "('walk 1':1,'it''s':1);\n");
    }
}
