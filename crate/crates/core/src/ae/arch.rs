//! Autoencoder architecture descriptions.
//!
//! An architecture fixes the padded input shape, an encoder convolution
//! stack (a dimension-shrinking phase of strided kernels followed by a
//! channel-shrinking phase of unit-stride kernels), and the bottleneck
//! width. The decoder is always the exact mirror: the same convolutions
//! transposed, in reverse order, with channel roles swapped. ELU sits
//! between consecutive convolutions only — never after the bottleneck
//! linear maps and never after the final output layer, so an architecture
//! with no convolutions at all is purely linear (useful for closed-form
//! tests).

use crate::error::{Error, Result};

/// One convolution layer: channels, square kernel, stride, zero padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvSpec {
    /// Output extent of the forward convolution along one axis.
    pub fn out_size(&self, n: usize) -> Result<usize> {
        if self.stride == 0 || self.kernel == 0 {
            return Err(Error::InvalidConfig {
                key: "arch.conv".into(),
                reason: "kernel and stride must be positive".into(),
            });
        }
        if n + 2 * self.pad < self.kernel {
            return Err(Error::InvalidConfig {
                key: "arch.conv".into(),
                reason: format!(
                    "extent {n} with padding {} is smaller than kernel {}",
                    self.pad, self.kernel
                ),
            });
        }
        Ok((n + 2 * self.pad - self.kernel) / self.stride + 1)
    }

    /// The mirrored layer: a transposed convolution mapping the output
    /// extent back; channel roles swap.
    pub fn mirrored(&self) -> ConvSpec {
        ConvSpec {
            in_ch: self.out_ch,
            out_ch: self.in_ch,
            ..*self
        }
    }

    /// Output extent of the transposed convolution along one axis.
    pub fn transpose_out_size(&self, n: usize) -> usize {
        (n - 1) * self.stride + self.kernel - 2 * self.pad
    }
}

/// Shape contract of an encoder/decoder pair on a given grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AeArchitecture {
    /// Raw field extents (x-fastest grid: `nx` columns, `ny` rows).
    pub nx: usize,
    pub ny: usize,
    /// Network input extents after zero padding at the high side.
    pub pad_nx: usize,
    pub pad_ny: usize,
    /// Encoder convolutions, dimension phase first, then channel phase.
    pub encoder_convs: Vec<ConvSpec>,
    /// Channels and spatial extents after the last encoder convolution.
    pub final_channels: usize,
    pub final_ny: usize,
    pub final_nx: usize,
    /// Flattened width feeding the bottleneck linear map.
    pub bottleneck_in: usize,
    /// Reduced order.
    pub r: usize,
}

fn pad_up(n: usize, multiple: usize) -> usize {
    n.div_ceil(multiple) * multiple
}

impl AeArchitecture {
    /// The standard architecture: pad both extents up to multiples of 8,
    /// three stride-2 kernel-4 convolutions growing channels 1→8→16→32
    /// while the extents halve, then two unit-stride kernel-3 convolutions
    /// shrinking channels 32→16→8, then flatten into a width-`r` linear
    /// bottleneck.
    pub fn standard(nx: usize, ny: usize, r: usize) -> Result<Self> {
        let convs = vec![
            ConvSpec { in_ch: 1, out_ch: 8, kernel: 4, stride: 2, pad: 1 },
            ConvSpec { in_ch: 8, out_ch: 16, kernel: 4, stride: 2, pad: 1 },
            ConvSpec { in_ch: 16, out_ch: 32, kernel: 4, stride: 2, pad: 1 },
            ConvSpec { in_ch: 32, out_ch: 16, kernel: 3, stride: 1, pad: 1 },
            ConvSpec { in_ch: 16, out_ch: 8, kernel: 3, stride: 1, pad: 1 },
        ];
        Self::with_convs(nx, ny, pad_up(nx, 8), pad_up(ny, 8), convs, r)
    }

    /// A fully linear architecture with no convolutions and bottleneck
    /// width equal to the point count: flatten, one linear map, and its
    /// mirror. With identity weights and zero biases, encode and decode
    /// are exact identities.
    pub fn linear_toy(nx: usize, ny: usize) -> Result<Self> {
        Self::with_convs(nx, ny, nx, ny, Vec::new(), nx * ny)
    }

    /// Builds an architecture from explicit convolution specs, verifying
    /// the shape chain and the mirror property.
    pub fn with_convs(
        nx: usize,
        ny: usize,
        pad_nx: usize,
        pad_ny: usize,
        encoder_convs: Vec<ConvSpec>,
        r: usize,
    ) -> Result<Self> {
        let bad = |reason: String| Error::InvalidConfig {
            key: "arch".into(),
            reason,
        };
        if nx == 0 || ny == 0 || r == 0 {
            return Err(bad("extents and reduced order must be positive".into()));
        }
        if pad_nx < nx || pad_ny < ny {
            return Err(bad(format!(
                "padded extents {pad_nx}x{pad_ny} smaller than field {nx}x{ny}"
            )));
        }
        let (mut h, mut w, mut ch) = (pad_ny, pad_nx, 1usize);
        for (i, spec) in encoder_convs.iter().enumerate() {
            if spec.in_ch != ch {
                return Err(bad(format!(
                    "encoder layer {i} expects {} channels but receives {ch}",
                    spec.in_ch
                )));
            }
            h = spec.out_size(h)?;
            w = spec.out_size(w)?;
            ch = spec.out_ch;
        }
        // The mirror must restore the padded extents exactly; walk back.
        let (mut mh, mut mw) = (h, w);
        for spec in encoder_convs.iter().rev() {
            mh = spec.transpose_out_size(mh);
            mw = spec.transpose_out_size(mw);
        }
        if mh != pad_ny || mw != pad_nx {
            return Err(bad(format!(
                "mirrored decoder restores {mw}x{mh}, not the padded {pad_nx}x{pad_ny}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            pad_nx,
            pad_ny,
            final_channels: ch,
            final_ny: h,
            final_nx: w,
            bottleneck_in: ch * h * w,
            encoder_convs,
            r,
        })
    }

    /// Decoder convolutions: the encoder stack mirrored and reversed.
    pub fn decoder_convs(&self) -> Vec<ConvSpec> {
        self.encoder_convs
            .iter()
            .rev()
            .map(|s| s.mirrored())
            .collect()
    }

    /// Number of grid points in the raw field.
    pub fn points(&self) -> usize {
        self.nx * self.ny
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_architecture_on_the_reference_grid() {
        let a = AeArchitecture::standard(127, 63, 10).unwrap();
        assert_eq!((a.pad_nx, a.pad_ny), (128, 64));
        assert_eq!((a.final_nx, a.final_ny, a.final_channels), (16, 8, 8));
        assert_eq!(a.bottleneck_in, 1024);
        assert_eq!(a.encoder_convs.len(), 5);
    }

    #[test]
    fn standard_architecture_on_a_coarse_grid() {
        let a = AeArchitecture::standard(33, 17, 5).unwrap();
        assert_eq!((a.pad_nx, a.pad_ny), (40, 24));
        assert_eq!((a.final_nx, a.final_ny), (5, 3));
        assert_eq!(a.bottleneck_in, 8 * 5 * 3);
    }

    #[test]
    fn decoder_is_the_exact_mirror() {
        let a = AeArchitecture::standard(33, 17, 5).unwrap();
        let dec = a.decoder_convs();
        assert_eq!(dec.len(), 5);
        // Reverse order with swapped channel roles.
        for (d, e) in dec.iter().zip(a.encoder_convs.iter().rev()) {
            assert_eq!(d.in_ch, e.out_ch);
            assert_eq!(d.out_ch, e.in_ch);
            assert_eq!(d.kernel, e.kernel);
            assert_eq!(d.stride, e.stride);
            assert_eq!(d.pad, e.pad);
        }
        // First decoder conv consumes the bottleneck channels, last emits 1.
        assert_eq!(dec[0].in_ch, a.final_channels);
        assert_eq!(dec.last().unwrap().out_ch, 1);

        // And the spatial chain restores the padded extents.
        let (mut h, mut w) = (a.final_ny, a.final_nx);
        for d in &dec {
            h = d.transpose_out_size(h);
            w = d.transpose_out_size(w);
        }
        assert_eq!((w, h), (a.pad_nx, a.pad_ny));
    }

    #[test]
    fn linear_toy_has_no_convolutions_and_full_width() {
        let a = AeArchitecture::linear_toy(5, 3).unwrap();
        assert!(a.encoder_convs.is_empty());
        assert_eq!(a.bottleneck_in, 15);
        assert_eq!(a.r, 15);
        assert_eq!((a.pad_nx, a.pad_ny), (5, 3));
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let convs = vec![
            ConvSpec { in_ch: 1, out_ch: 8, kernel: 3, stride: 1, pad: 1 },
            ConvSpec { in_ch: 4, out_ch: 8, kernel: 3, stride: 1, pad: 1 },
        ];
        assert!(AeArchitecture::with_convs(16, 16, 16, 16, convs, 4).is_err());
    }

    #[test]
    fn tiny_extent_that_cannot_mirror_is_rejected() {
        // A stride-2 layer on an odd extent cannot restore it exactly.
        let convs = vec![ConvSpec { in_ch: 1, out_ch: 2, kernel: 4, stride: 2, pad: 1 }];
        assert!(AeArchitecture::with_convs(9, 9, 9, 9, convs, 4).is_err());
    }
}
