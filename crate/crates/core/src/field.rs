/// Nodal values stored element-major, then node (x fastest), then variable.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub n_elements: usize,
    pub nodes_per_element: usize,
    pub n_vars: usize,
    pub data: Vec<f64>,
    pub time: f64,
}

impl NodalField {
    pub fn zeros(n_elements: usize, nodes_per_element: usize, n_vars: usize) -> Self {
        NodalField {
            n_elements,
            nodes_per_element,
            n_vars,
            data: vec![0.0; n_elements * nodes_per_element * n_vars],
            time: 0.0,
        }
    }

    #[inline]
    pub fn element_len(&self) -> usize {
        self.nodes_per_element * self.n_vars
    }

    #[inline]
    pub fn state(&self, e: usize, q: usize) -> &[f64] {
        let start = (e * self.nodes_per_element + q) * self.n_vars;
        &self.data[start..start + self.n_vars]
    }

    #[inline]
    pub fn state_mut(&mut self, e: usize, q: usize) -> &mut [f64] {
        let start = (e * self.nodes_per_element + q) * self.n_vars;
        &mut self.data[start..start + self.n_vars]
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[f64] {
        let len = self.element_len();
        &self.data[e * len..(e + 1) * len]
    }

    #[inline]
    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let len = self.element_len();
        &mut self.data[e * len..(e + 1) * len]
    }

    /// Iterator over every nodal state.
    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_vars)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
