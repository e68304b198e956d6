setTimeout(function () {
  var adEl = document.getElementById("mpu");
  if (!adEl || adEl.clientHeight === 0) {
    var banner = document.createElement("div");
    banner.textContent = "reader please allow ads";
    document.body.appendChild(banner);
  }
}, 2000);
