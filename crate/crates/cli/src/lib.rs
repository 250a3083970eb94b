//! Command-line front end. Human-readable output goes to stderr; CSV and
//! stream dumps go to stdout.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use hsicodec::entropy_coder::CodedSegment;
use hsicodec::quality_metrics::{band_metrics, cube_bands, format_sig, rd_csv, rd_points, PEAK};
use hsicodec::{
    bitrate, decode_cube, encode_cube_detailed, open_cube, store_cube, Bitstream,
    CompensationConfig, EncoderConfig, Error, HyperCube, SegmentTag, TrainConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CORRUPT: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "hsicodec",
    version,
    about = "Neural inter-band codec for hyperspectral cubes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a BSQ cube (raw file with a .hdr next to it).
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        /// Also write the resized reference cube, for use with `metrics`.
        #[arg(long, value_name = "PATH")]
        emit_resized: Option<PathBuf>,
    },
    /// Reconstruct a cube from a bitstream.
    Decode { input: PathBuf, output: PathBuf },
    /// Per-band MSE, SSIM, PSNR and next-band correlation as CSV.
    Metrics {
        reference: PathBuf,
        test: PathBuf,
        #[arg(long, default_value_t = PEAK)]
        peak: i32,
    },
    /// Rate-distortion sweep over tolerances, as CSV.
    Rd {
        input: PathBuf,
        /// Comma-separated tolerances.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.05, 0.1])]
        lambdas: Vec<f64>,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Dump the header and segment table of a bitstream.
    Info { input: PathBuf },
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    /// Relative error tolerance for compensation.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Quantization step for compensation offsets.
    #[arg(long, default_value_t = 1)]
    pub qstep: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Band indices to leave out, e.g. `--exclude 101,151`.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub mse_goal: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    /// Training time limit per band, in seconds.
    #[arg(long, default_value_t = 1000.0)]
    pub max_seconds: f64,
    #[arg(long)]
    pub no_compensation: bool,
}

impl CodecArgs {
    pub fn encoder_config(&self) -> Result<EncoderConfig, Error> {
        if !(self.max_seconds.is_finite() && self.max_seconds >= 0.0) {
            return Err(Error::Config(format!(
                "invalid --max-seconds {}",
                self.max_seconds
            )));
        }
        let cfg = EncoderConfig {
            train: TrainConfig {
                mse_goal: self.mse_goal,
                max_epochs: self.max_epochs,
                max_time: Duration::from_secs_f64(self.max_seconds),
                seed: self.seed,
                ..Default::default()
            },
            compensation: CompensationConfig {
                lambda: self.lambda,
                q_step: self.qstep,
                enabled: !self.no_compensation,
            },
            band_exclusions: self.exclude.clone(),
        };
        cfg.train.validate()?;
        cfg.compensation.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Write { .. } | Error::Format(_) | Error::CorruptInput(_) => EXIT_IO,
        Error::CorruptStream { .. } => EXIT_CORRUPT,
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Dimension(_)
        | Error::NoContent(_)
        | Error::UndefinedCorrelation
        | Error::Config(_) => EXIT_USAGE,
    }
}

fn read_stream(path: &Path) -> Result<Bitstream, Error> {
    Bitstream::from_bytes(&std::fs::read(path)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.display().to_string(),
        source,
    })
}

fn encode(
    input: &Path,
    output: &Path,
    codec: &CodecArgs,
    emit: Option<&Path>,
) -> Result<(), Error> {
    let cfg = codec.encoder_config()?;
    let cube = open_cube(input)?;
    let enc = encode_cube_detailed(&cube, &cfg)?;
    write_file(output, &enc.bitstream.to_bytes())?;
    if let Some(path) = emit {
        store_cube(&HyperCube::from_bands(&enc.reference)?, path)?;
    }
    let records = band_metrics(&enc.reference, &enc.reconstruction, PEAK)?;
    let predicted = &records[enc.first_band + 1..];
    eprintln!(
        "{} -> {}: {} bands, {} bytes, {} bpppb",
        input.display(),
        output.display(),
        enc.reference.len(),
        enc.bitstream.byte_len(),
        format_sig(bitrate(&enc.bitstream), 6)
    );
    for (r, rec) in predicted.iter().zip(&enc.records) {
        eprintln!(
            "band {:>4} (source {:>4}): psnr {} dB, ssim {}, {} offsets, {} epochs",
            r.band_index,
            rec.source_band,
            format_sig(r.psnr_db, 6),
            format_sig(r.ssim, 6),
            rec.offsets,
            rec.report.epochs_run
        );
    }
    if !predicted.is_empty() {
        let n = predicted.len() as f64;
        eprintln!(
            "mean over predicted bands: psnr {} dB, ssim {}",
            format_sig(predicted.iter().map(|r| r.psnr_db).sum::<f64>() / n, 6),
            format_sig(predicted.iter().map(|r| r.ssim).sum::<f64>() / n, 6)
        );
    }
    Ok(())
}

fn metrics(reference: &Path, test: &Path, peak: i32) -> Result<(), Error> {
    let a = open_cube(reference)?;
    let b = open_cube(test)?;
    if (a.rows(), a.cols(), a.bands()) != (b.rows(), b.cols(), b.bands()) {
        return Err(Error::Dimension(format!(
            "reference is {}x{}x{}, test is {}x{}x{}",
            a.rows(),
            a.cols(),
            a.bands(),
            b.rows(),
            b.cols(),
            b.bands()
        )));
    }
    if peak <= 0 {
        return Err(Error::Config(format!("peak must be positive, got {peak}")));
    }
    let records = band_metrics(&cube_bands(&a), &cube_bands(&b), peak)?;
    println!("band,mse,ssim,psnr_db,cc_next");
    for r in records {
        let cc = r.cc_next.map_or_else(String::new, |c| format_sig(c, 6));
        println!(
            "{},{},{},{},{cc}",
            r.band_index,
            format_sig(r.mse, 6),
            format_sig(r.ssim, 6),
            format_sig(r.psnr_db, 6)
        );
    }
    Ok(())
}

fn info(input: &Path) -> Result<(), Error> {
    let bs = read_stream(input)?;
    bs.check_grammar()?;
    let h = &bs.header;
    println!("bands {}x{}, coded {}", h.rows, h.cols, h.coded_bands);
    println!("source {}x{}x{}", h.src_rows, h.src_cols, h.src_bands);
    println!("leading zero bands {}", h.leading_zero_bands);
    let excl: Vec<String> = h.exclusions.iter().map(u32::to_string).collect();
    println!("exclusions [{}]", excl.join(","));
    let comp = &h.compensation;
    if comp.enabled {
        println!(
            "compensation lambda {} q_step {}",
            format_sig(comp.lambda, 6),
            comp.q_step
        );
    } else {
        println!("compensation off");
    }
    println!("header bytes {}", bs.header_len());
    println!("total bytes {}", bs.byte_len());
    println!("bpppb {}", format_sig(bitrate(&bs), 6));
    println!("index,tag,wire_bytes,mode,decoded_bytes");
    for (k, seg) in bs.segments.iter().enumerate() {
        let body = if seg.tag == SegmentTag::FirstBand {
            seg.body.get(8..).unwrap_or(&[])
        } else {
            &seg.body[..]
        };
        let coded = match seg.tag {
            SegmentTag::Ranges => None,
            _ => Some(CodedSegment::from_bytes(body).map_err(|e| match e {
                Error::CorruptStream { reason, .. } => Error::CorruptStream {
                    segment: format!("segment {k} ({})", seg.tag.name()),
                    reason,
                },
                other => other,
            })?),
        };
        let (mode, len) = match coded {
            Some(c) => (format!("{:?}", c.mode).to_lowercase(), c.original_len),
            None => ("plain".into(), seg.body.len()),
        };
        println!("{k},{},{},{mode},{len}", seg.tag.name(), seg.wire_len());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Encode {
            input,
            output,
            codec,
            emit_resized,
        } => encode(input, output, codec, emit_resized.as_deref()),
        Command::Decode { input, output } => {
            let cube = decode_cube(&read_stream(input)?)?;
            store_cube(&cube, output)?;
            eprintln!(
                "{} -> {}: {}x{}x{}",
                input.display(),
                output.display(),
                cube.rows(),
                cube.cols(),
                cube.bands()
            );
            Ok(())
        }
        Command::Metrics {
            reference,
            test,
            peak,
        } => metrics(reference, test, *peak),
        Command::Rd {
            input,
            lambdas,
            codec,
        } => {
            let cfg = codec.encoder_config()?;
            let cube = open_cube(input)?;
            print!("{}", rd_csv(&rd_points(&cube, lambdas, &cfg)?));
            Ok(())
        }
        Command::Info { input } => info(input),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("hsicodec: {e}");
            exit_code(&e)
        }
    }
}
