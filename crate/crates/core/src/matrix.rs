use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<T>>", try_from = "Vec<Vec<T>>")]
#[serde(bound(serialize = "T: Clone + Serialize", deserialize = "T: Clone + Deserialize<'de>"))]
pub struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Square<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self { n, data: vec![value; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                data.push(f(x, y));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, String> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(format!("matrix is not square ({n} rows)"));
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }
}

impl<T> Square<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, x: usize) -> &[T] {
        &self.data[x * self.n..(x + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T> Index<(usize, usize)> for Square<T> {
    type Output = T;

    #[inline]
    fn index(&self, (x, y): (usize, usize)) -> &T {
        &self.data[x * self.n + y]
    }
}

impl<T> IndexMut<(usize, usize)> for Square<T> {
    #[inline]
    fn index_mut(&mut self, (x, y): (usize, usize)) -> &mut T {
        &mut self.data[x * self.n + y]
    }
}

impl<T: Clone> From<Square<T>> for Vec<Vec<T>> {
    fn from(m: Square<T>) -> Self {
        m.to_rows()
    }
}

impl<T: Clone> TryFrom<Vec<Vec<T>>> for Square<T> {
    type Error = String;

    fn try_from(rows: Vec<Vec<T>>) -> Result<Self, String> {
        Self::from_rows(rows)
    }
}
