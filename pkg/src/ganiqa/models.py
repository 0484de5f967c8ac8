"""Generator and discriminator networks for the hole-inpainting GAN."""

import torch
import torch.nn as nn

from .errors import ShapeError, UnknownArch

# arch_id -> (input size, per-layer output channels of the hidden convs)
DISCRIMINATOR_ARCHS = {
    "D1": (64, [64, 128, 256, 512]),
    "D2": (128, [32, 64, 128, 256, 512]),
    "D3": (128, [16, 32, 64, 128, 256]),
}

LEAKY_SLOPE = 0.2
INIT_STD = 0.02


def _init_weights(module):
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, INIT_STD)
        if module.bias is not None:
            nn.init.zeros_(module.bias)


class Discriminator(nn.Module):
    """Patch classifier: stack of stride-2 4x4 convs ending in a sigmoid.

    Hidden layers halve the spatial size; the final 4x4 conv maps the 4x4
    activation to a single logit. ``features`` exposes the flattened
    penultimate conv activation used for codebook learning.
    """

    def __init__(self, arch_id="D1"):
        super().__init__()
        if arch_id not in DISCRIMINATOR_ARCHS:
            raise UnknownArch(f"unknown discriminator architecture {arch_id!r}")
        self.arch_id = arch_id
        self.input_size, channels = DISCRIMINATOR_ARCHS[arch_id]
        self.feature_dim = channels[-1] * 4 * 4

        layers = []
        in_ch = 3
        for out_ch in channels:
            layers.append(nn.Conv2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1))
            in_ch = out_ch
        self.hidden = nn.ModuleList(layers)
        self.final = nn.Conv2d(in_ch, 1, kernel_size=4, stride=1, padding=0)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)
        self.apply(_init_weights)

    def _check_input(self, x):
        if x.dim() != 4 or x.shape[1] != 3 or x.shape[2:] != (self.input_size,) * 2:
            raise ShapeError(
                f"{self.arch_id} expects N x 3 x {self.input_size} x {self.input_size}, "
                f"got {tuple(x.shape)}"
            )

    def hidden_activations(self, x):
        """Activations after each hidden conv + leaky ReLU."""
        self._check_input(x)
        acts = []
        for conv in self.hidden:
            x = self.act(conv(x))
            acts.append(x)
        return acts

    def logits(self, x):
        """Pre-sigmoid scalar per image (N,)."""
        h = self.hidden_activations(x)[-1]
        return self.final(h).reshape(x.shape[0])

    def forward(self, x):
        return torch.sigmoid(self.logits(x))

    def features(self, x):
        """Flattened penultimate conv activation (N, feature_dim)."""
        h = self.hidden_activations(x)[-1]
        return h.reshape(x.shape[0], -1)


class Generator(nn.Module):
    """Pool-free encoder-decoder inpainting a hole-punched image.

    The encoder mirrors the discriminator conv stack down to a 4x4 map,
    squeezed through a fully connected bottleneck (a 4x4 conv acting on
    all units, 4000 channels by default), then mirrored back up with
    transposed convs. Output is sigmoid-squashed to [0, 1].
    """

    def __init__(self, input_size=64, bottleneck=4000, base_channels=64, max_channels=512):
        super().__init__()
        if input_size < 8 or input_size & (input_size - 1):
            raise ShapeError("input_size must be a power of two >= 8")
        self.input_size = input_size
        self.bottleneck = bottleneck

        channels = []
        ch = base_channels
        size = input_size
        while size > 4:
            channels.append(min(ch, max_channels))
            ch *= 2
            size //= 2

        enc = []
        in_ch = 3
        for out_ch in channels:
            enc.append(nn.Conv2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1))
            in_ch = out_ch
        enc.append(nn.Conv2d(in_ch, bottleneck, kernel_size=4, stride=1, padding=0))
        self.encoder = nn.ModuleList(enc)

        dec = [nn.ConvTranspose2d(bottleneck, channels[-1], kernel_size=4, stride=1, padding=0)]
        rev = list(reversed(channels))
        for i, in_ch in enumerate(rev):
            out_ch = rev[i + 1] if i + 1 < len(rev) else 3
            dec.append(nn.ConvTranspose2d(in_ch, out_ch, kernel_size=4, stride=2, padding=1))
        self.decoder = nn.ModuleList(dec)
        self.enc_act = nn.LeakyReLU(LEAKY_SLOPE)
        self.dec_act = nn.ReLU()
        self.apply(_init_weights)

    def forward(self, x):
        if x.dim() != 4 or x.shape[1] != 3 or x.shape[2:] != (self.input_size,) * 2:
            raise ShapeError(
                f"generator expects N x 3 x {self.input_size} x {self.input_size}, "
                f"got {tuple(x.shape)}"
            )
        for conv in self.encoder:
            x = self.enc_act(conv(x))
        for deconv in self.decoder[:-1]:
            x = self.dec_act(deconv(x))
        return torch.sigmoid(self.decoder[-1](x))


def build_discriminator(arch_id):
    return Discriminator(arch_id)
