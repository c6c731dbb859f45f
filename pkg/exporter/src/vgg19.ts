/**
 * Canonical VGG19 feature-trunk architecture, truncated after conv5_1.
 *
 * The engine consumes exactly these 13 conv layers; the torchvision
 * checkpoint stores them under `features.<index>` module names.
 */

export interface ConvLayer {
  /** canonical name, e.g. "conv3_2" */
  name: string;
  /** index inside torchvision's `features` sequential */
  featureIndex: number;
  outChannels: number;
  inChannels: number;
}

export const CONV_LAYERS: readonly ConvLayer[] = [
  { name: 'conv1_1', featureIndex: 0, outChannels: 64, inChannels: 3 },
  { name: 'conv1_2', featureIndex: 2, outChannels: 64, inChannels: 64 },
  { name: 'conv2_1', featureIndex: 5, outChannels: 128, inChannels: 64 },
  { name: 'conv2_2', featureIndex: 7, outChannels: 128, inChannels: 128 },
  { name: 'conv3_1', featureIndex: 10, outChannels: 256, inChannels: 128 },
  { name: 'conv3_2', featureIndex: 12, outChannels: 256, inChannels: 256 },
  { name: 'conv3_3', featureIndex: 14, outChannels: 256, inChannels: 256 },
  { name: 'conv3_4', featureIndex: 16, outChannels: 256, inChannels: 256 },
  { name: 'conv4_1', featureIndex: 19, outChannels: 512, inChannels: 256 },
  { name: 'conv4_2', featureIndex: 21, outChannels: 512, inChannels: 512 },
  { name: 'conv4_3', featureIndex: 23, outChannels: 512, inChannels: 512 },
  { name: 'conv4_4', featureIndex: 25, outChannels: 512, inChannels: 512 },
  { name: 'conv5_1', featureIndex: 28, outChannels: 512, inChannels: 512 },
];

/** ImageNet preprocessing constants the pretrained weights assume. */
export const PREPROCESS_MEAN = [0.485, 0.456, 0.406];
export const PREPROCESS_STD = [0.229, 0.224, 0.225];

/**
 * Default public source: torchvision's ImageNet VGG19 checkpoint,
 * re-hosted as safetensors (the `tv_in1k` tag marks the torchvision
 * weights).
 */
export const DEFAULT_SOURCE_URL =
  'https://huggingface.co/timm/vgg19.tv_in1k/resolve/main/model.safetensors';

export function kernelShape(layer: ConvLayer): number[] {
  return [layer.outChannels, layer.inChannels, 3, 3];
}

export function biasShape(layer: ConvLayer): number[] {
  return [layer.outChannels];
}
