"""Losses, adversarial training loop, checkpointing, and inpainting."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .errors import DataEmpty, DimMismatch, NonFiniteLoss
from .models import Discriminator, Generator
from .validation import check_image, check_mask

PROB_FLOOR = 1e-7  # clamp for probabilities inside logs

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    learning_rate: float = 0.0002
    lam: float = 0.9          # weight of the reconstruction term in the joint loss
    batch_size: int = 16
    epochs: int = 20
    seed: int = 0
    beta1: float = 0.5
    beta2: float = 0.999
    arch_id: str = "D1"
    input_size: int = 64
    bottleneck: int = 4000
    base_channels: int = 64

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")


@dataclass
class Checkpoint:
    generator: Generator
    discriminator: Discriminator
    config: TrainConfig
    epoch: int
    loss_history: list = field(default_factory=list)


def _clamp_prob(p):
    return p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)


def rec_loss(x, m, g_out):
    """Squared L2 norm of the masked residual, averaged over the batch."""
    if x.shape != g_out.shape or m.shape[-2:] != x.shape[-2:]:
        raise DimMismatch(f"shapes {tuple(x.shape)}, {tuple(m.shape)}, {tuple(g_out.shape)}")
    if m.dim() == x.dim() - 1:
        m = m.unsqueeze(-3)
    resid = m * (x - g_out)
    return resid.pow(2).flatten(1).sum(dim=1).mean()


def adv_loss_d(d_real, d_fake):
    """Discriminator objective mean[log d_real + log(1 - d_fake)] (to ascend)."""
    d_real = _clamp_prob(d_real)
    d_fake = _clamp_prob(d_fake)
    return (torch.log(d_real) + torch.log(1.0 - d_fake)).mean()


def adv_loss_g(d_fake):
    """Non-saturating generator adversarial term -mean[log d_fake] (to descend)."""
    return -torch.log(_clamp_prob(d_fake)).mean()


def joint_loss(rec, adv_g, lam):
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    return lam * rec + (1.0 - lam) * adv_g


def _to_batches(dataset, config, generator_rng):
    n = len(dataset)
    order = torch.randperm(n, generator=generator_rng).tolist()
    for start in range(0, n, config.batch_size):
        idx = order[start : start + config.batch_size]
        imgs = torch.stack(
            [torch.from_numpy(np.ascontiguousarray(dataset[i][0].transpose(2, 0, 1))) for i in idx]
        ).float()
        masks = torch.stack(
            [torch.from_numpy(np.ascontiguousarray(dataset[i][1])) for i in idx]
        ).float()
        yield imgs, masks


def train_inpainter(dataset, config, log_fn=None):
    """Alternating adversarial training of generator and discriminator.

    ``dataset`` is a sequence of (image, mask) numpy pairs sized to the
    generator input. Returns a Checkpoint with per-epoch loss history.
    """
    if len(dataset) == 0:
        raise DataEmpty("no training pairs")
    size = config.input_size
    for img, mask in dataset:
        check_image(img)
        check_mask(mask, image_shape=img.shape)
        if img.shape[:2] != (size, size):
            raise DimMismatch(f"training images must be {size}x{size}")

    torch.manual_seed(config.seed)
    gen = Generator(
        input_size=size, bottleneck=config.bottleneck, base_channels=config.base_channels
    )
    disc = Discriminator(config.arch_id)
    if disc.input_size != size:
        raise DimMismatch(
            f"discriminator {config.arch_id} expects {disc.input_size}px input, config has {size}"
        )
    opt_g = torch.optim.Adam(gen.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.learning_rate, betas=(config.beta1, config.beta2))
    batch_rng = torch.Generator().manual_seed(config.seed)

    history = []
    for epoch in range(config.epochs):
        sums = {"joint": 0.0, "rec": 0.0, "adv_d": 0.0, "adv_g": 0.0}
        n_batches = 0
        for imgs, masks in _to_batches(dataset, config, batch_rng):
            holes = imgs * (1.0 - masks.unsqueeze(1))
            g_out = gen(holes)

            opt_d.zero_grad()
            d_obj = adv_loss_d(disc(imgs), disc(g_out.detach()))
            (-d_obj).backward()
            opt_d.step()

            opt_g.zero_grad()
            rec = rec_loss(imgs, masks, g_out)
            adv_g = adv_loss_g(disc(g_out))
            joint = joint_loss(rec, adv_g, config.lam)
            joint.backward()
            opt_g.step()

            vals = {
                "joint": joint.item(),
                "rec": rec.item(),
                "adv_d": d_obj.item(),
                "adv_g": adv_g.item(),
            }
            if any(not math.isfinite(v) for v in vals.values()):
                raise NonFiniteLoss(f"epoch {epoch}: {vals}")
            for k, v in vals.items():
                sums[k] += v
            n_batches += 1

        means = {k: v / n_batches for k, v in sums.items()}
        means["epoch"] = epoch
        history.append(means)
        if log_fn is not None:
            log_fn(means)

    return Checkpoint(
        generator=gen,
        discriminator=disc,
        config=config,
        epoch=config.epochs,
        loss_history=history,
    )


def save_checkpoint(ckpt, path):
    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "config": asdict(ckpt.config),
            "epoch": ckpt.epoch,
            "loss_history": ckpt.loss_history,
            "generator": ckpt.generator.state_dict(),
            "discriminator": ckpt.discriminator.state_dict(),
        },
        path,
    )


def load_checkpoint(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    config = TrainConfig(**blob["config"])
    gen = Generator(
        input_size=config.input_size,
        bottleneck=config.bottleneck,
        base_channels=config.base_channels,
    )
    gen.load_state_dict(blob["generator"])
    gen.eval()
    disc = Discriminator(config.arch_id)
    disc.load_state_dict(blob["discriminator"])
    disc.eval()
    return Checkpoint(
        generator=gen,
        discriminator=disc,
        config=config,
        epoch=blob["epoch"],
        loss_history=blob["loss_history"],
    )


def inpaint(ckpt, img, mask):
    """Composite the generator's fill into the masked region only."""
    arr = check_image(img)
    m = check_mask(mask, image_shape=arr.shape)
    size = ckpt.generator.input_size
    if arr.shape[:2] != (size, size):
        raise DimMismatch(f"generator expects {size}x{size} images, got {arr.shape[:2]}")
    x = torch.from_numpy(arr.transpose(2, 0, 1)).float().unsqueeze(0)
    mt = torch.from_numpy(m.astype(np.float32)).unsqueeze(0).unsqueeze(0)
    with torch.no_grad():
        g_out = ckpt.generator(x * (1.0 - mt))
    filled = g_out[0].numpy().transpose(1, 2, 0).astype(np.float64)
    out = arr.copy()
    out[m == 1] = np.clip(filled[m == 1], 0.0, 1.0)
    return out


def psnr(ref, test):
    """Peak signal-to-noise ratio in dB for [0, 1] images; inf when equal."""
    a = check_image(ref)
    b = check_image(test)
    if a.shape != b.shape:
        raise DimMismatch(f"{a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
