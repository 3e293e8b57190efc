import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // Server-backed suites each own a uvicorn child; keep files sequential
    // so two suites never race for ports or CPU.
    fileParallelism: false,
  },
});
