setTimeout(function () {
  var probe = document.getElementById("promo");
  if (!probe || probe.clientHeight === 0) {
    var alertBox = document.createElement("div");
    alertBox.textContent = "content hidden until ads load";
    document.body.appendChild(alertBox);
  }
}, 4000);
