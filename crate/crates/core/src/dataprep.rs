//! Ingestion, feature filtering, site partitioning, stratified splitting,
//! standardization, and a synthetic generator shaped like a small
//! three-site imbalanced cohort.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::select_rows;
use crate::{Error, Matrix, Result, RngHandle, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Index of each row in the originally loaded table.
    pub row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if y.len() != x.nrows() || feature_names.len() != x.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} matrix with {} labels and {} names",
                x.nrows(),
                x.ncols(),
                y.len(),
                feature_names.len()
            )));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::InvalidHyperparameter("labels must be 0 or 1".into()));
        }
        let row_ids = (0..x.nrows()).collect();
        Ok(Self {
            x,
            y,
            feature_names,
            row_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// `(majority, minority)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let minor = self.y.iter().filter(|&&v| v == 1).count();
        (self.len() - minor, minor)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: select_rows(&self.x, idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            row_ids: idx.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            x: Matrix::from_fn(self.len(), cols.len(), |i, j| self.x[(i, cols[j])]),
            y: self.y.clone(),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            row_ids: self.row_ids.clone(),
        }
    }

    /// Rows of one class.
    pub fn class_rows(&self, label: u8) -> Matrix {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.y[i] == label).collect();
        select_rows(&self.x, &idx)
    }

    /// Writes features, then the label column, then `row_id`.
    pub fn write_csv(&self, path: &Path, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(label_column);
        header.push("row_id");
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.y[i].to_string());
            rec.push(self.row_ids[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Column roles for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvColumns {
    pub label: String,
    /// Optional integer column assigning each row to a site.
    #[serde(default)]
    pub site: Option<String>,
    /// Optional column carrying original row ids.
    #[serde(default)]
    pub row_id: Option<String>,
}

impl CsvColumns {
    pub fn label(label: &str) -> Self {
        Self {
            label: label.into(),
            site: None,
            row_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub sites: Option<Vec<u32>>,
}

/// Parses a headered CSV; every column other than the declared label, site and
/// row-id columns is a numeric feature.
pub fn load_csv(path: &Path, columns: &CsvColumns) -> Result<LoadedCsv> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let label_at = find(&columns.label).ok_or_else(|| Error::Ingestion {
        row: 0,
        column: columns.label.clone(),
        message: "label column not found in header".into(),
    })?;
    let site_at = match &columns.site {
        Some(s) => Some(find(s).ok_or_else(|| Error::Ingestion {
            row: 0,
            column: s.clone(),
            message: "site column not found in header".into(),
        })?),
        None => None,
    };
    let id_at = columns.row_id.as_deref().and_then(find);
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_at && Some(c) != site_at && Some(c) != id_at)
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut sites = Vec::new();
    let mut ids = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record?;
        let cell = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("").trim();
            let v: f64 = raw.parse().map_err(|_| Error::Ingestion {
                row,
                column: headers[c].clone(),
                message: format!("cannot parse {raw:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row,
                    column: headers[c].clone(),
                    message: "value is not finite".into(),
                });
            }
            Ok(v)
        };
        for &c in &feature_cols {
            values.push(cell(c)?);
        }
        let label = cell(label_at)?;
        if label != 0.0 && label != 1.0 {
            return Err(Error::Ingestion {
                row,
                column: headers[label_at].clone(),
                message: format!("label {label} is not 0 or 1"),
            });
        }
        labels.push(label as u8);
        if let Some(c) = site_at {
            let s = cell(c)?;
            if s < 0.0 || s.fract() != 0.0 {
                return Err(Error::Ingestion {
                    row,
                    column: headers[c].clone(),
                    message: format!("site {s} is not a non-negative integer"),
                });
            }
            sites.push(s as u32);
        }
        if let Some(c) = id_at {
            ids.push(cell(c)? as usize);
        }
    }
    let n = labels.len();
    let d = feature_cols.len();
    let x = Matrix::from_row_slice(n, d, &values);
    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    let mut dataset = Dataset::new(x, labels, names)?;
    if id_at.is_some() {
        dataset.row_ids = ids;
    }
    log::info!("loaded {} rows x {} features from {}", n, d, path.display());
    Ok(LoadedCsv {
        dataset,
        sites: site_at.map(|_| sites),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Greedy column-order scan: a column is dropped when `|r|` against any
/// earlier kept column exceeds `threshold`. Returns the kept indices.
pub fn correlation_filter(x: &Matrix, threshold: f64) -> Result<Vec<usize>> {
    if x.nrows() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 rows".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("threshold {threshold} outside (0, 1]")));
    }
    let cols: Vec<Vec<f64>> = x.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..cols.len() {
        if kept.iter().all(|&k| pearson(&cols[k], &cols[j]).abs() <= threshold) {
            kept.push(j);
        }
    }
    Ok(kept)
}

/// `(majority, minority)` rows assigned to one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteProfile {
    pub major: usize,
    pub minor: usize,
}

impl SiteProfile {
    pub const fn new(major: usize, minor: usize) -> Self {
        Self { major, minor }
    }

    /// Whole-site class counts whose 60 % stratified training sides are
    /// 51/9, 46/8 and 62/10.
    pub const DEFAULT: [SiteProfile; 3] = [
        SiteProfile::new(85, 15),
        SiteProfile::new(77, 13),
        SiteProfile::new(104, 16),
    ];
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteData {
    pub site_id: u32,
    pub train: Dataset,
    pub test: Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SitePartition {
    pub sites: Vec<SiteData>,
}

impl SitePartition {
    pub fn minority_train_counts(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.train.class_counts().1).collect()
    }
}

/// Mixture components for the server: `floor(0.9 · Σ minority)`.
pub fn components_for(minority_counts: &[usize]) -> usize {
    9 * minority_counts.iter().sum::<usize>() / 10
}

fn split_into_sites(
    data: &Dataset,
    groups: Vec<Vec<usize>>,
    ids: &[u32],
    train_frac: f64,
    seed: RngHandle,
) -> Result<SitePartition> {
    let sites = groups
        .into_iter()
        .zip(ids)
        .enumerate()
        .map(|(i, (rows, &site_id))| {
            let site = data.subset(&rows);
            let (train, test) = stratified_split(&site, train_frac, seed.child(i as u64))?;
            Ok(SiteData { site_id, train, test })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SitePartition { sites })
}

/// Random disjoint assignment of rows to sites matching `profile` exactly,
/// followed by a stratified train/test split inside each site.
pub fn partition_sites(
    data: &Dataset,
    profile: &[SiteProfile],
    train_frac: f64,
    seed: RngHandle,
) -> Result<SitePartition> {
    let (major_total, minor_total) = data.class_counts();
    let need_major: usize = profile.iter().map(|p| p.major).sum();
    let need_minor: usize = profile.iter().map(|p| p.minor).sum();
    if need_major > major_total || need_minor > minor_total {
        return Err(Error::InsufficientData(format!(
            "profile needs {need_major}/{need_minor} rows, dataset has {major_total}/{minor_total}"
        )));
    }
    let mut rng = seed.child(u64::MAX).rng();
    let mut pools: [Vec<usize>; 2] = [
        (0..data.len()).filter(|&i| data.y[i] == 0).collect(),
        (0..data.len()).filter(|&i| data.y[i] == 1).collect(),
    ];
    pools.iter_mut().for_each(|p| p.shuffle(&mut rng));
    let mut taken = [0usize; 2];
    let groups = profile
        .iter()
        .map(|p| {
            let mut rows = Vec::with_capacity(p.major + p.minor);
            for (class, want) in [(0, p.major), (1, p.minor)] {
                rows.extend_from_slice(&pools[class][taken[class]..taken[class] + want]);
                taken[class] += want;
            }
            rows.sort_unstable();
            rows
        })
        .collect();
    let ids: Vec<u32> = (1..=profile.len() as u32).collect();
    split_into_sites(data, groups, &ids, train_frac, seed)
}

/// Partition following an explicit per-row site column.
pub fn partition_by_column(data: &Dataset, sites: &[u32], train_frac: f64, seed: RngHandle) -> Result<SitePartition> {
    if sites.len() != data.len() {
        return Err(Error::Shape("one site id per row required".into()));
    }
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &s) in sites.iter().enumerate() {
        groups.entry(s).or_default().push(i);
    }
    let ids: Vec<u32> = groups.keys().copied().collect();
    split_into_sites(data, groups.into_values().collect(), &ids, train_frac, seed)
}

/// Per-class split; each class contributes `floor(count · frac + 0.5)` rows to
/// the training side. Rows keep their original relative order.
pub fn stratified_split(data: &Dataset, train_frac: f64, seed: RngHandle) -> Result<(Dataset, Dataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Config(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let mut rng = seed.rng();
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in [0u8, 1] {
        let mut rows: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == class).collect();
        if rows.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "class {class} has {} rows; stratified split needs 2",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        let n_train = (rows.len() as f64 * train_frac + 0.5).floor() as usize;
        train_idx.extend_from_slice(&rows[..n_train]);
        test_idx.extend_from_slice(&rows[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}

/// Per-feature training mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    /// Divisor per feature; 1 for constant features.
    pub scale: Vec<f64>,
}

impl StandardizationStats {
    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("cannot standardize an empty training set".into()));
        }
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            // constant columns only center
            let s = if sd <= 1e-12 * m.abs().max(1.0) { 1.0 } else { sd };
            mean.push(m);
            scale.push(s);
        }
        Ok(Self { mean, scale })
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j])
    }

    pub fn apply_dataset(&self, d: &Dataset) -> Dataset {
        Dataset {
            x: self.apply(&d.x),
            ..d.clone()
        }
    }
}

/// Standardizes both sides with statistics of the training side only.
pub fn standardize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, StandardizationStats)> {
    let stats = StandardizationStats::fit(&train.x)?;
    Ok((stats.apply_dataset(train), stats.apply_dataset(test), stats))
}

/// Shape of a synthetic multi-site cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub profile: Vec<SiteProfile>,
    pub features: usize,
    /// Mahalanobis distance between the pooled class means.
    pub margin: f64,
    /// Standard deviation of each site's mean offset, per feature.
    pub site_shift: f64,
    /// Rank of the shared factor structure correlating the features.
    pub factors: usize,
    /// Loading scale of the factors; 0 gives independent features.
    pub factor_scale: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            profile: SiteProfile::DEFAULT.to_vec(),
            features: 88,
            margin: 2.0,
            site_shift: 0.3,
            factors: 8,
            factor_scale: 0.35,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub dataset: Dataset,
    /// Site id (1-based) of every row.
    pub sites: Vec<u32>,
}

/// Draws a cohort: both classes share a factor covariance, the minority mean
/// sits `margin` away from the majority mean, and every site adds its own
/// small offset to both classes. Rows are stored site by site.
pub fn synth_generate(spec: &SynthSpec, seed: RngHandle) -> Result<SynthData> {
    let d = spec.features;
    if d == 0 || spec.profile.is_empty() {
        return Err(Error::Config(
            "synthetic spec needs features and at least one site".into(),
        ));
    }
    if !(spec.margin >= 0.0 && spec.site_shift >= 0.0 && spec.factor_scale >= 0.0) {
        return Err(Error::Config(
            "margin, site shift and factor scale must be non-negative".into(),
        ));
    }
    let mut rng = seed.rng();
    let normal = |r: &mut crate::rng::StreamRng| -> f64 { r.sample(StandardNormal) };

    let loadings = Matrix::from_fn(d, spec.factors, |_, _| spec.factor_scale * normal(&mut rng));
    // whiten along the class direction so the margin is a Mahalanobis distance
    let cov = Matrix::identity(d, d) + &loadings * loadings.transpose();
    let mut direction = Vector::from_fn(d, |_, _| normal(&mut rng));
    direction /= direction.norm();
    let maha = direction.dot(
        &cov.cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("synthetic covariance".into()))?
            .solve(&direction),
    );
    let offset = &direction * (spec.margin / maha.sqrt());

    let total: usize = spec.profile.iter().map(|p| p.major + p.minor).sum();
    let mut x = Matrix::zeros(total, d);
    let mut y = Vec::with_capacity(total);
    let mut sites = Vec::with_capacity(total);
    let mut row = 0;
    for (s, p) in spec.profile.iter().enumerate() {
        let shift = Vector::from_fn(d, |_, _| spec.site_shift * normal(&mut rng));
        for (label, count) in [(0u8, p.major), (1u8, p.minor)] {
            for _ in 0..count {
                let f = Vector::from_fn(spec.factors, |_, _| normal(&mut rng));
                let e = Vector::from_fn(d, |_, _| normal(&mut rng));
                let mut v = &shift + &loadings * f + e;
                if label == 1 {
                    v += &offset;
                }
                x.row_mut(row).copy_from(&v.transpose());
                y.push(label);
                sites.push(s as u32 + 1);
                row += 1;
            }
        }
    }
    let names = (0..d).map(|j| format!("f{j}")).collect();
    Ok(SynthData {
        dataset: Dataset::new(x, y, names)?,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_fixture() {
        let f = write("a,b,label\n1,2,0\n3,4.5,1\n-1,0,0\n");
        let d = load_csv(f.path(), &CsvColumns::label("label")).unwrap().dataset;
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.y, vec![0, 1, 0]);
        assert_eq!(d.x[(1, 1)], 4.5);
    }

    #[test]
    fn unparseable_cell_names_coordinates() {
        let f = write("a,b,label\n1,2,0\n3,abc,1\n");
        match load_csv(f.path(), &CsvColumns::label("label")) {
            Err(Error::Ingestion { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_label_and_missing_label_column() {
        let f = write("a,label\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), &CsvColumns::label("label")),
            Err(Error::Ingestion { .. })
        ));
        let f = write("a,b\n1,2\n");
        assert!(load_csv(f.path(), &CsvColumns::label("label")).is_err());
    }

    #[test]
    fn site_column_is_not_a_feature() {
        let f = write("a,site,label\n1,1,0\n2,2,1\n");
        let cols = CsvColumns {
            label: "label".into(),
            site: Some("site".into()),
            row_id: None,
        };
        let loaded = load_csv(f.path(), &cols).unwrap();
        assert_eq!(loaded.dataset.dim(), 1);
        assert_eq!(loaded.sites, Some(vec![1, 2]));
    }

    #[test]
    fn duplicate_column_dropped() {
        let mut rng = RngHandle::new(1, 0).rng();
        let x = Matrix::from_fn(50, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x2 = x.clone();
        x2.set_column(1, &x.column(0));
        assert_eq!(correlation_filter(&x2, 0.8).unwrap(), vec![0, 2]);
    }

    #[test]
    fn threshold_one_keeps_non_collinear() {
        let mut rng = RngHandle::new(2, 0).rng();
        let mut x = Matrix::from_fn(30, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let noisy = x.column(0) * 0.9 + x.column(2) * 0.1;
        x.set_column(1, &noisy);
        assert_eq!(correlation_filter(&x, 1.0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn constant_column_correlates_with_nothing() {
        let x = Matrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        assert_eq!(correlation_filter(&x, 0.5).unwrap(), vec![0, 1]);
    }

    #[test]
    fn correlation_filter_rejects_bad_input() {
        assert!(correlation_filter(&Matrix::zeros(1, 3), 0.8).is_err());
        assert!(correlation_filter(&Matrix::zeros(5, 3), 0.0).is_err());
    }

    fn labelled(major: usize, minor: usize) -> Dataset {
        let n = major + minor;
        let x = Matrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64);
        let y = (0..n).map(|i| u8::from(i >= major)).collect();
        Dataset::new(x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn stratified_split_counts() {
        let d = labelled(90, 10);
        let (train, test) = stratified_split(&d, 0.6, RngHandle::new(3, 0)).unwrap();
        assert_eq!(train.class_counts(), (54, 6));
        assert_eq!(test.class_counts(), (36, 4));
        let again = stratified_split(&d, 0.6, RngHandle::new(3, 0)).unwrap();
        assert_eq!(again.0.row_ids, train.row_ids);
    }

    #[test]
    fn stratified_split_needs_two_per_class() {
        let d = labelled(10, 1);
        assert!(matches!(
            stratified_split(&d, 0.6, RngHandle::new(0, 0)),
            Err(Error::InsufficientData(_))
        ));
        assert!(stratified_split(&labelled(10, 5), 1.0, RngHandle::new(0, 0)).is_err());
    }

    #[test]
    fn default_profile_sizes() {
        let d = labelled(266, 44);
        let part = partition_sites(&d, &SiteProfile::DEFAULT, 0.6, RngHandle::new(4, 0)).unwrap();
        let train: Vec<_> = part.sites.iter().map(|s| s.train.class_counts()).collect();
        let test: Vec<_> = part.sites.iter().map(|s| s.test.class_counts()).collect();
        assert_eq!(train, vec![(51, 9), (46, 8), (62, 10)]);
        assert_eq!(test, vec![(34, 6), (31, 5), (42, 6)]);
        assert_eq!(components_for(&part.minority_train_counts()), 24);
    }

    #[test]
    fn partition_rejects_oversized_profile() {
        let d = labelled(100, 5);
        assert!(partition_sites(&d, &[SiteProfile::new(10, 6)], 0.6, RngHandle::new(0, 0)).is_err());
    }

    #[test]
    fn standardization_fixture() {
        let train = Dataset::new(
            Matrix::from_row_slice(2, 2, &[0.0, 5.0, 2.0, 5.0]),
            vec![0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let test = Dataset::new(
            Matrix::from_row_slice(1, 2, &[1.0, 7.0]),
            vec![0],
            train.feature_names.clone(),
        )
        .unwrap();
        let (tr, te, stats) = standardize(&train, &test).unwrap();
        assert_eq!(stats.mean, vec![1.0, 5.0]);
        assert_eq!(stats.scale, vec![1.0, 1.0]);
        assert_eq!(te.x[(0, 0)], 0.0);
        // constant column: centered only
        assert_eq!(te.x[(0, 1)], 2.0);
        assert_eq!(tr.x[(1, 0)], 1.0);
    }

    #[test]
    fn synthetic_shape() {
        let data = synth_generate(&SynthSpec::default(), RngHandle::new(5, 0)).unwrap();
        assert_eq!(data.dataset.len(), 310);
        assert_eq!(data.dataset.dim(), 88);
        assert_eq!(data.dataset.class_counts(), (266, 44));
        let per_site: Vec<usize> = (1..=3)
            .map(|s| data.sites.iter().filter(|&&v| v == s).count())
            .collect();
        assert_eq!(per_site, vec![100, 90, 120]);
    }
}
