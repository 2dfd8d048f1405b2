// WAV playback from the base64 payload the service returns.

export interface Player {
  play(): Promise<void>;
  stop(): void;
}

export function base64ToBlobUrl(base64: string, mime = "audio/wav"): string {
  const binary = atob(base64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return URL.createObjectURL(new Blob([bytes], { type: mime }));
}

export function createPlayer(
  base64: string,
  audioFactory: (url: string) => HTMLAudioElement = (url) => new Audio(url),
): Player {
  const url = base64ToBlobUrl(base64);
  const element = audioFactory(url);
  return {
    async play() {
      element.currentTime = 0;
      await element.play();
    },
    stop() {
      element.pause();
      URL.revokeObjectURL(url);
    },
  };
}
